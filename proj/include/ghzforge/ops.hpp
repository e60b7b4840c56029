#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <unordered_map>

#include "ghzforge/basis.hpp"

namespace ghzforge {

/// Identifies one fusion wiring: qubit i of an nA-qubit state (the CNOT
/// control, which survives) fused with qubit j of an nB-qubit state (the
/// CNOT target, which is measured out). Output ordering is A's qubits
/// followed by B's qubits without j.
struct FusionSpec {
    int nA = 0;
    int i = 0;
    int nB = 0;
    int j = 0;

    FusionSpec() = default;
    FusionSpec(int nA_, int i_, int nB_, int j_) : nA(nA_), i(i_), nB(nB_), j(j_) {
        detail::require(nA >= 2 && nB >= 2, "FusionSpec: states need at least 2 qubits");
        detail::require(i >= 0 && i < nA, "FusionSpec: i out of range");
        detail::require(j >= 0 && j < nB, "FusionSpec: j out of range");
        detail::require(nA + nB - 1 <= kMaxQubits, "FusionSpec: output exceeds qubit limit");
    }

    int n_out() const { return nA + nB - 1; }

    bool operator==(const FusionSpec&) const = default;
};

/// Deterministic label map of one fusion spec: entry (la << nB | lb) holds
/// the output label code. Total and exactly 2-to-1.
struct FusionMap {
    FusionSpec spec;
    std::vector<uint32_t> out_label;

    uint32_t operator()(uint32_t la, uint32_t lb) const {
        return out_label[(size_t{la} << spec.nB) | lb];
    }
};

/// Builds the fusion label map from the basis algebra. For basis inputs the
/// Z measurement outcome is fifty-fifty, and after the X correction both
/// branches land on the same output basis state, so a single label suffices:
///   bits(out) = bits(A) ++ (bits(B) xor (a_i xor b_j)) without position j,
///   x-sign(out) = x-sign(A) * x-sign(B).
inline FusionMap build_fusion_map(const FusionSpec& spec) {
    FusionMap map;
    map.spec = spec;
    map.out_label.resize(size_t{1} << (spec.nA + spec.nB));
    const int n_out = spec.n_out();
    for (uint32_t la = 0; la < (1u << spec.nA); ++la) {
        BasisLabel labelA(spec.nA, la);
        const uint32_t a = canonical_bits(labelA);
        const uint32_t a_i = (a >> (spec.nA - 1 - spec.i)) & 1u;
        for (uint32_t lb = 0; lb < (1u << spec.nB); ++lb) {
            BasisLabel labelB(spec.nB, lb);
            uint32_t b = canonical_bits(labelB);
            const uint32_t b_j = (b >> (spec.nB - 1 - spec.j)) & 1u;
            if (a_i ^ b_j) b = ~b & ((1u << spec.nB) - 1);
            // Drop bit j of b (bit position nB-1-j), keep the rest in order.
            const int jb = spec.nB - 1 - spec.j;
            uint32_t b_rest = ((b >> (jb + 1)) << jb) | (b & ((1u << jb) - 1));
            uint32_t bits = (a << (spec.nB - 1)) | b_rest;
            int x_sign = labelA.sign(1) * labelB.sign(1);
            map.out_label[(size_t{la} << spec.nB) | lb] = label_from_bits(n_out, bits, x_sign).code;
        }
    }
    return map;
}

/// Deterministic label map of one non-local stabilizer measurement.
///
/// For each ancilla label the map stores the support letters it triggers as
/// a label-code XOR (`post_flip`), plus the ancilla's X-type sign. The
/// outcome for a (main, ancilla) basis pair is then
///   m = x-sign(ancilla) * eigenvalue(stabilizer, main label),
/// so the pair is kept exactly when the ancilla X-sign bit matches the
/// main label's eigenvalue parity under the stabilizer mask.
struct MeasurementMap {
    StabilizerIndex stabilizer;
    int ancilla_n = 0;
    std::vector<uint32_t> post_flip; // indexed by ancilla label code
    std::vector<uint8_t> ancilla_x_bit; // 1 when the ancilla X-type sign is '-'

    /// Outcome sign for a basis pair: +1 keeps, -1 discards.
    int outcome(uint32_t main_code, uint32_t ancilla_code) const {
        bool negative = detail::parity(main_code & stabilizer.mask) ^ (ancilla_x_bit[ancilla_code] != 0);
        return negative ? -1 : +1;
    }

    uint32_t post_label(uint32_t main_code, uint32_t ancilla_code) const {
        return main_code ^ post_flip[ancilla_code];
    }
};

inline MeasurementMap build_measurement_map(const StabilizerIndex& s) {
    MeasurementMap map;
    map.stabilizer = s;
    const PauliString pauli = stabilizer_to_pauli(s);
    const int w = weight(s);
    map.ancilla_n = w;
    map.post_flip.resize(size_t{1} << w);
    map.ancilla_x_bit.resize(size_t{1} << w);

    std::vector<int> support; // 0-based main qubit positions, ascending
    for (int q = 0; q < s.n; ++q)
        if (pauli.letters[q] != 'I') support.push_back(q);

    const uint32_t x_all = pauli.x_mask();
    const uint32_t z_all = pauli.z_mask();

    for (uint32_t la = 0; la < (1u << w); ++la) {
        BasisLabel ancilla_label(w, la);
        map.ancilla_x_bit[la] = la & 1u;
        const uint32_t v = canonical_bits(ancilla_label);
        // The triggered Pauli: support letters at positions where the
        // ancilla bitstring has a 1.
        uint32_t xq = 0, zq = 0;
        for (int q = 0; q < w; ++q) {
            if (!((v >> (w - 1 - q)) & 1u)) continue;
            uint32_t bit = 1u << support[q];
            xq |= x_all & bit;
            zq |= z_all & bit;
        }
        // Conjugation flips the sign of every generator the triggered Pauli
        // anticommutes with; accumulate those as a label-code XOR.
        uint32_t flip = 0;
        if (detail::parity(zq)) flip |= 1u; // generator 1 = X...X
        for (int i = 2; i <= s.n; ++i) {
            uint32_t zz = (1u << (i - 2)) | (1u << (i - 1));
            if (detail::parity(xq & zz)) flip |= 1u << (i - 1);
        }
        map.post_flip[la] = flip;
    }
    return map;
}

/// Process-wide caches for the two map kinds. The dynamic program requests
/// identical specs millions of times; fills are idempotent so losing a race
/// only costs a rebuild.
namespace map_cache {

struct FusionKey {
    int nA, i, nB, j;
    bool operator==(const FusionKey&) const = default;
};
struct FusionKeyHash {
    size_t operator()(const FusionKey& k) const {
        return (size_t(k.nA) << 24) ^ (size_t(k.i) << 16) ^ (size_t(k.nB) << 8) ^ size_t(k.j);
    }
};
struct MeasurementKey {
    int n;
    uint32_t mask;
    bool operator==(const MeasurementKey&) const = default;
};
struct MeasurementKeyHash {
    size_t operator()(const MeasurementKey& k) const { return (size_t(k.n) << 20) ^ k.mask; }
};

template <typename Key, typename Hash, typename Value, typename Build>
const Value& lookup(std::unordered_map<Key, std::shared_ptr<const Value>, Hash>& table,
                    std::shared_mutex& mutex, const Key& key, Build build) {
    {
        std::shared_lock lock(mutex);
        auto it = table.find(key);
        if (it != table.end()) return *it->second;
    }
    auto value = std::make_shared<const Value>(build());
    std::unique_lock lock(mutex);
    auto [it, inserted] = table.try_emplace(key, std::move(value));
    return *it->second;
}

inline const FusionMap& fusion(const FusionSpec& spec) {
    static std::unordered_map<FusionKey, std::shared_ptr<const FusionMap>, FusionKeyHash> table;
    static std::shared_mutex mutex;
    return lookup(table, mutex, FusionKey{spec.nA, spec.i, spec.nB, spec.j},
                  [&] { return build_fusion_map(spec); });
}

inline const MeasurementMap& measurement(const StabilizerIndex& s) {
    static std::unordered_map<MeasurementKey, std::shared_ptr<const MeasurementMap>, MeasurementKeyHash> table;
    static std::shared_mutex mutex;
    return lookup(table, mutex, MeasurementKey{s.n, s.mask}, [&] { return build_measurement_map(s); });
}

} // namespace map_cache

/// Cached accessor for the fusion label map.
inline const FusionMap& basis_fusion_map(const FusionSpec& spec) {
    return map_cache::fusion(spec);
}

/// Cached accessor for the measurement label map.
inline const MeasurementMap& basis_measurement_map(const StabilizerIndex& s) {
    return map_cache::measurement(s);
}

/// Fuses state `a` at qubit i with state `b` at qubit j into one
/// (nA + nB - 1)-qubit state. Deterministic: coefficients of the output
/// label accumulate over all contributing input label pairs.
inline GhzDiagState fuse(const GhzDiagState& a, int i, const GhzDiagState& b, int j) {
    const FusionMap& map = basis_fusion_map(FusionSpec(a.n, i, b.n, j));
    std::vector<double> out(size_t{1} << map.spec.n_out(), 0.0);
    for (uint32_t la = 0; la < a.coeffs.size(); ++la) {
        const double pa = a.coeffs[la];
        if (pa == 0.0) continue;
        const uint32_t* row = &map.out_label[size_t{la} << map.spec.nB];
        for (uint32_t lb = 0; lb < b.coeffs.size(); ++lb) out[row[lb]] += pa * b.coeffs[lb];
    }
    return GhzDiagState(map.spec.n_out(), std::move(out)).clamp();
}

/// Result of a non-local stabilizer measurement. post_state is only present
/// when the +1 outcome has nonzero probability; asking for the post state of
/// an impossible branch is the caller's error.
struct MeasurementResult {
    std::optional<GhzDiagState> post_state;
    double success_prob = 0.0;

    const GhzDiagState& post() const {
        if (!post_state) throw std::logic_error("MeasurementResult: impossible branch (success probability 0)");
        return *post_state;
    }
};

/// Measures stabilizer `s` of the main state, consuming `ancilla` (which
/// must span weight(s) qubits). Keeps and renormalizes the +1 branch.
inline MeasurementResult measure_stabilizer(const GhzDiagState& main, const StabilizerIndex& s,
                                            const GhzDiagState& ancilla) {
    detail::require(s.n == main.n, "measure_stabilizer: stabilizer size mismatch");
    const MeasurementMap& map = basis_measurement_map(s);
    detail::require(ancilla.n == map.ancilla_n, "measure_stabilizer: ancilla size != stabilizer weight");

    std::vector<double> kept(main.coeffs.size(), 0.0);
    double success = 0.0;
    for (uint32_t la = 0; la < ancilla.coeffs.size(); ++la) {
        const double qa = ancilla.coeffs[la];
        if (qa == 0.0) continue;
        const bool anc_bit = map.ancilla_x_bit[la] != 0;
        const uint32_t flip = map.post_flip[la];
        for (uint32_t lm = 0; lm < main.coeffs.size(); ++lm) {
            if (detail::parity(lm & s.mask) != anc_bit) continue; // -1 outcome
            const double mass = main.coeffs[lm] * qa;
            kept[lm ^ flip] += mass;
            success += mass;
        }
    }

    MeasurementResult result;
    result.success_prob = success;
    if (success > 0.0) {
        for (double& c : kept) c /= success;
        result.post_state = GhzDiagState(main.n, std::move(kept)).clamp();
    }
    return result;
}

} // namespace ghzforge
