#pragma once

#include <cmath>
#include <complex>
#include <optional>
#include <vector>

#include "ghzforge/basis.hpp"

namespace ghzforge {
namespace oracle {

/// Brute-force reference layer. Everything here works on dense statevectors,
/// basis pair by basis pair, and is deliberately unrelated to the label-map
/// fast path it is used to check. Qubit 1 (1-based numbering) is the most
/// significant amplitude-index bit.

using cdouble = std::complex<double>;

struct DenseState {
    int n = 0;
    std::vector<cdouble> amplitudes;

    DenseState() = default;
    explicit DenseState(int n_) : n(n_), amplitudes(size_t{1} << n_) {
        detail::require(n >= 1 && n <= kMaxQubits, "DenseState: n out of range");
    }

    double norm_sq() const {
        double s = 0.0;
        for (const auto& a : amplitudes) s += std::norm(a);
        return s;
    }
};

/// Dense statevector of |phi^{s_1...s_n}> = (|u> + s_1 |u-bar>)/sqrt(2).
inline DenseState basis_ket(const BasisLabel& label) {
    DenseState psi(label.n);
    const uint32_t dim_mask = (1u << label.n) - 1;
    uint32_t u = canonical_bits(label);
    double amp = std::sqrt(0.5);
    psi.amplitudes[u] = amp;
    psi.amplitudes[~u & dim_mask] = label.sign(1) * amp;
    return psi;
}

namespace gates {

/// Bit index of qubit q (1-based, qubit 1 = MSB) in an n-qubit register.
inline int bit_of(int n, int q) { return n - q; }

inline void cnot(DenseState& psi, int control, int target) {
    const uint32_t cb = 1u << bit_of(psi.n, control);
    const uint32_t tb = 1u << bit_of(psi.n, target);
    for (uint32_t idx = 0; idx < psi.amplitudes.size(); ++idx) {
        if ((idx & cb) && !(idx & tb)) std::swap(psi.amplitudes[idx], psi.amplitudes[idx | tb]);
    }
}

/// Controlled single-qubit Pauli, letter in {X, Y, Z}.
inline void controlled_pauli(DenseState& psi, int control, int target, char letter) {
    const uint32_t cb = 1u << bit_of(psi.n, control);
    const uint32_t tb = 1u << bit_of(psi.n, target);
    for (uint32_t idx = 0; idx < psi.amplitudes.size(); ++idx) {
        if (!(idx & cb)) continue;
        switch (letter) {
            case 'X':
                if (!(idx & tb)) std::swap(psi.amplitudes[idx], psi.amplitudes[idx | tb]);
                break;
            case 'Y':
                if (!(idx & tb)) {
                    cdouble a0 = psi.amplitudes[idx];
                    cdouble a1 = psi.amplitudes[idx | tb];
                    psi.amplitudes[idx] = cdouble(0, -1) * a1;
                    psi.amplitudes[idx | tb] = cdouble(0, 1) * a0;
                }
                break;
            case 'Z':
                if (idx & tb) psi.amplitudes[idx] = -psi.amplitudes[idx];
                break;
            default:
                throw std::invalid_argument("controlled_pauli: bad letter");
        }
    }
}

inline void hadamard(DenseState& psi, int q) {
    const uint32_t qb = 1u << bit_of(psi.n, q);
    const double inv_sqrt2 = std::sqrt(0.5);
    for (uint32_t idx = 0; idx < psi.amplitudes.size(); ++idx) {
        if (idx & qb) continue;
        cdouble a0 = psi.amplitudes[idx];
        cdouble a1 = psi.amplitudes[idx | qb];
        psi.amplitudes[idx] = inv_sqrt2 * (a0 + a1);
        psi.amplitudes[idx | qb] = inv_sqrt2 * (a0 - a1);
    }
}

/// Z-basis measurement of qubit q. Returns the (unnormalized) post-state
/// with qubit q removed for each outcome; the squared norm of each branch is
/// its Born probability.
inline std::pair<DenseState, DenseState> measure_z_and_remove(const DenseState& psi, int q) {
    DenseState out0(psi.n - 1), out1(psi.n - 1);
    const int b = bit_of(psi.n, q);
    const uint32_t low = (1u << b) - 1;
    for (uint32_t idx = 0; idx < psi.amplitudes.size(); ++idx) {
        uint32_t reduced = ((idx >> (b + 1)) << b) | (idx & low);
        if (idx & (1u << b))
            out1.amplitudes[reduced] = psi.amplitudes[idx];
        else
            out0.amplitudes[reduced] = psi.amplitudes[idx];
    }
    return {std::move(out0), std::move(out1)};
}

} // namespace gates

/// GHZ-basis decomposition: probabilities |<phi^L|psi>|^2 for every label,
/// plus the largest cross-term magnitude |<phi^L|psi><psi|phi^L'>|, L != L'.
struct Decomposition {
    std::vector<double> coeffs;
    double off_diagonal = 0.0;
};

inline Decomposition ghz_basis_decompose(const DenseState& psi) {
    const int n = psi.n;
    detail::require(n >= 2, "ghz_basis_decompose: need n >= 2");
    const uint32_t dim_mask = (1u << n) - 1;
    const double inv_sqrt2 = std::sqrt(0.5);
    std::vector<cdouble> amps(size_t{1} << n);
    for (uint32_t code = 0; code < (1u << n); ++code) {
        BasisLabel label(n, code);
        uint32_t u = canonical_bits(label);
        amps[code] = inv_sqrt2 * (psi.amplitudes[u] + double(label.sign(1)) * psi.amplitudes[~u & dim_mask]);
    }
    Decomposition d;
    d.coeffs.resize(amps.size());
    double max_abs = 0.0, second_abs = 0.0;
    for (size_t i = 0; i < amps.size(); ++i) {
        double a = std::abs(amps[i]);
        d.coeffs[i] = a * a;
        if (a > max_abs) {
            second_abs = max_abs;
            max_abs = a;
        } else if (a > second_abs) {
            second_abs = a;
        }
    }
    d.off_diagonal = max_abs * second_abs;
    return d;
}

struct OracleMeasureResult {
    std::optional<GhzDiagState> post_state;
    double success_prob = 0.0;
    double off_diagonal = 0.0;
};

namespace detail_oracle {

inline void check_total_qubits(int total) {
    ghzforge::detail::require(total <= kMaxQubits, "oracle: total qubit count exceeds limit");
}

/// Tensor product |a> (x) |b>, a's qubits first.
inline DenseState kron(const DenseState& a, const DenseState& b) {
    DenseState out(a.n + b.n);
    const uint32_t bdim = 1u << b.n;
    for (uint32_t ia = 0; ia < a.amplitudes.size(); ++ia) {
        if (a.amplitudes[ia] == cdouble{}) continue;
        for (uint32_t ib = 0; ib < bdim; ++ib)
            out.amplitudes[(ia << b.n) | ib] = a.amplitudes[ia] * b.amplitudes[ib];
    }
    return out;
}

} // namespace detail_oracle

/// Fusion by direct circuit simulation: CNOT from qubit i of `a` (0-based)
/// onto qubit j of `b`, Z measurement of that qubit of `b`, and an X
/// correction on b's surviving qubits when the outcome is |1>. Both outcome
/// branches are accumulated with their Born probabilities. When
/// `max_off_diagonal` is given it receives the largest GHZ-basis cross term
/// seen in any branch.
inline GhzDiagState oracle_fuse(const GhzDiagState& a, int i, const GhzDiagState& b, int j,
                                double* max_off_diagonal = nullptr) {
    ghzforge::detail::require(i >= 0 && i < a.n, "oracle_fuse: i out of range");
    ghzforge::detail::require(j >= 0 && j < b.n, "oracle_fuse: j out of range");
    detail_oracle::check_total_qubits(a.n + b.n);
    const int n_out = a.n + b.n - 1;
    std::vector<double> out(size_t{1} << n_out, 0.0);
    if (max_off_diagonal) *max_off_diagonal = 0.0;

    for (uint32_t la = 0; la < a.coeffs.size(); ++la) {
        if (a.coeffs[la] == 0.0) continue;
        DenseState ka = basis_ket(BasisLabel(a.n, la));
        for (uint32_t lb = 0; lb < b.coeffs.size(); ++lb) {
            double w = a.coeffs[la] * b.coeffs[lb];
            if (w == 0.0) continue;
            DenseState psi = detail_oracle::kron(ka, basis_ket(BasisLabel(b.n, lb)));
            // 1-based positions in the joint register.
            gates::cnot(psi, i + 1, a.n + j + 1);
            auto [branch0, branch1] = gates::measure_z_and_remove(psi, a.n + j + 1);
            // Outcome |1>: X on every surviving qubit of b.
            for (int q = a.n + 1; q <= n_out; ++q) {
                const uint32_t qb = 1u << gates::bit_of(n_out, q);
                for (uint32_t idx = 0; idx < branch1.amplitudes.size(); ++idx)
                    if (!(idx & qb)) std::swap(branch1.amplitudes[idx], branch1.amplitudes[idx | qb]);
            }
            for (const DenseState* branch : {&branch0, &branch1}) {
                double p = branch->norm_sq();
                if (p < 1e-15) continue;
                Decomposition d = ghz_basis_decompose(*branch);
                for (size_t c = 0; c < d.coeffs.size(); ++c) out[c] += w * d.coeffs[c];
                if (max_off_diagonal)
                    *max_off_diagonal = std::max(*max_off_diagonal, d.off_diagonal / p);
            }
        }
    }
    return GhzDiagState(n_out, std::move(out)).clamp();
}

/// Non-local stabilizer measurement by direct circuit simulation: each
/// ancilla qubit controls one support letter of the stabilizer on the main
/// state, ancilla qubits are read out in the X basis (Hadamard + Z
/// measurement), and the joint outcome is sign(s) * prod m_i. The +1 branch
/// is kept and renormalized; the -1 branch is discarded.
inline OracleMeasureResult oracle_measure(const GhzDiagState& main, const StabilizerIndex& s,
                                          const GhzDiagState& ancilla) {
    ghzforge::detail::require(s.n == main.n, "oracle_measure: stabilizer size mismatch");
    PauliString pauli = stabilizer_to_pauli(s);
    const int w = weight(s);
    ghzforge::detail::require(ancilla.n == w, "oracle_measure: ancilla size != stabilizer weight");
    detail_oracle::check_total_qubits(main.n + w);

    std::vector<int> support; // 1-based main qubits, ascending
    for (int q = 1; q <= main.n; ++q)
        if (pauli.letters[q - 1] != 'I') support.push_back(q);

    std::vector<double> kept(size_t{1} << main.n, 0.0);
    double success = 0.0;
    double off_diag = 0.0;

    for (uint32_t lm = 0; lm < main.coeffs.size(); ++lm) {
        if (main.coeffs[lm] == 0.0) continue;
        DenseState km = basis_ket(BasisLabel(main.n, lm));
        for (uint32_t la = 0; la < ancilla.coeffs.size(); ++la) {
            double weight_pair = main.coeffs[lm] * ancilla.coeffs[la];
            if (weight_pair == 0.0) continue;
            DenseState psi = detail_oracle::kron(km, basis_ket(BasisLabel(ancilla.n, la)));
            for (int q = 0; q < w; ++q)
                gates::controlled_pauli(psi, main.n + q + 1, support[q], pauli.letters[support[q] - 1]);

            // X-basis readout of the ancilla, both branches per qubit.
            // Ancilla qubits sit at the end; measuring the last qubit first
            // keeps the indices of the remaining ones stable.
            struct Branch {
                DenseState psi;
                int outcome_product;
            };
            std::vector<Branch> branches;
            branches.push_back({std::move(psi), +1});
            for (int q = w - 1; q >= 0; --q) {
                std::vector<Branch> next;
                for (auto& br : branches) {
                    gates::hadamard(br.psi, main.n + q + 1);
                    auto [b0, b1] = gates::measure_z_and_remove(br.psi, main.n + q + 1);
                    if (b0.norm_sq() > 1e-15) next.push_back({std::move(b0), br.outcome_product});
                    if (b1.norm_sq() > 1e-15) next.push_back({std::move(b1), -br.outcome_product});
                }
                branches = std::move(next);
            }
            for (auto& br : branches) {
                int m = pauli.sign * br.outcome_product;
                double p = br.psi.norm_sq();
                if (m != +1) continue;
                Decomposition d = ghz_basis_decompose(br.psi);
                success += weight_pair * p;
                for (size_t c = 0; c < d.coeffs.size(); ++c) kept[c] += weight_pair * d.coeffs[c];
                off_diag = std::max(off_diag, d.off_diagonal / std::max(p, 1e-300));
            }
        }
    }

    OracleMeasureResult result;
    result.success_prob = success;
    result.off_diagonal = off_diag;
    if (success > 0.0) {
        for (double& c : kept) c /= success;
        result.post_state = GhzDiagState(main.n, std::move(kept)).clamp();
    }
    return result;
}

} // namespace oracle
} // namespace ghzforge
