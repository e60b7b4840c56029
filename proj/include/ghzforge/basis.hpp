#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ghzforge {

/// Hard cap on qubit counts. Coefficient vectors are dense (2^n entries), so
/// this bounds memory; it also matches the reach of the statevector oracle.
inline constexpr int kMaxQubits = 16;

/// Coefficients in [-kClampTolerance, 0) are rounded up to zero; anything
/// more negative indicates a real bug upstream.
inline constexpr double kClampTolerance = 1e-14;

namespace detail {

inline void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

inline bool parity(uint32_t x) {
    return std::popcount(x) & 1u;
}

} // namespace detail

/// Label of one GHZ-basis state |phi^{s_1 s_2 ... s_n}>.
///
/// Bit (i-1) of `code` stores the sign s_i of the i-th stabilizer generator:
/// 0 for '+', 1 for '-'. Generator 1 is X_1 X_2 ... X_n; generator i >= 2 is
/// Z_{i-1} Z_i. Code 0 is the target state |phi_n^+>.
struct BasisLabel {
    int n = 0;
    uint32_t code = 0;

    BasisLabel() = default;
    BasisLabel(int n_, uint32_t code_) : n(n_), code(code_) {
        detail::require(n >= 2 && n <= kMaxQubits, "BasisLabel: n out of range");
        detail::require(code < (1u << n), "BasisLabel: code out of range");
    }

    /// Sign of generator i (1-based): +1 or -1.
    int sign(int i) const { return (code >> (i - 1)) & 1u ? -1 : +1; }

    bool operator==(const BasisLabel&) const = default;
};

/// Canonical computational bitstring of a basis label: the unique string
/// u with u_1 = 0 such that |phi^{s...}> = (|u> + s_1 |u-bar>)/sqrt(2).
/// Qubit q (1-based) maps to bit (n-q) of the result, i.e. qubit 1 is the
/// most significant bit, so |011> for n=3 is the integer 3.
inline uint32_t canonical_bits(const BasisLabel& label) {
    uint32_t bits = 0;
    uint32_t prev = 0;
    for (int q = 2; q <= label.n; ++q) {
        uint32_t flip = (label.code >> (q - 1)) & 1u;
        prev ^= flip;
        bits |= prev << (label.n - q);
    }
    return bits;
}

/// Inverse of canonical_bits. `bits` need not be canonical: a string and its
/// complement denote the same label (the X-type sign is `x_sign`).
inline BasisLabel label_from_bits(int n, uint32_t bits, int x_sign) {
    if (bits >> (n - 1)) bits = ~bits & ((1u << n) - 1); // canonicalize
    uint32_t code = x_sign < 0 ? 1u : 0u;
    for (int q = 2; q <= n; ++q) {
        uint32_t b_prev = (bits >> (n - q + 1)) & 1u;
        uint32_t b_cur = (bits >> (n - q)) & 1u;
        if (b_prev != b_cur) code |= 1u << (q - 1);
    }
    return BasisLabel(n, code);
}

/// A GHZ-diagonal density matrix: 2^n nonnegative coefficients indexed by
/// BasisLabel::code, summing to one. coeffs[0] is the fidelity.
struct GhzDiagState {
    int n = 0;
    std::vector<double> coeffs;

    GhzDiagState() = default;
    GhzDiagState(int n_, std::vector<double> coeffs_) : n(n_), coeffs(std::move(coeffs_)) {
        detail::require(n >= 2 && n <= kMaxQubits, "GhzDiagState: n out of range");
        detail::require(coeffs.size() == (size_t{1} << n), "GhzDiagState: coefficient count != 2^n");
    }

    double fidelity() const { return coeffs[0]; }

    size_t dim() const { return coeffs.size(); }

    /// Rounds tiny negative values (from float noise) up to zero in place.
    /// A coefficient below -kClampTolerance is an internal error.
    GhzDiagState& clamp() {
        for (double& c : coeffs) {
            if (c < 0.0) {
                if (c < -kClampTolerance) throw std::logic_error("GhzDiagState: negative coefficient beyond clamp tolerance");
                c = 0.0;
            }
        }
        return *this;
    }

    /// True when all coefficients are nonnegative and sum to 1 within `tol`.
    bool is_valid(double tol = 1e-9) const {
        double sum = 0.0;
        for (double c : coeffs) {
            if (c < 0.0) return false;
            sum += c;
        }
        return sum > 1.0 - tol && sum < 1.0 + tol;
    }

    bool operator==(const GhzDiagState&) const = default;
};

/// Isotropic Bell pair of fidelity F: the three error coefficients are equal.
inline GhzDiagState isotropic_bell(double fidelity) {
    detail::require(fidelity >= 0.0 && fidelity <= 1.0, "isotropic_bell: fidelity outside [0, 1]");
    double e = (1.0 - fidelity) / 3.0;
    return GhzDiagState(2, {fidelity, e, e, e});
}

/// Selects a non-trivial stabilizer of |phi_n^+> as a product of generators:
/// bit (i-1) of `mask` selects generator i (see BasisLabel for the order).
struct StabilizerIndex {
    int n = 0;
    uint32_t mask = 0;

    StabilizerIndex() = default;
    StabilizerIndex(int n_, uint32_t mask_) : n(n_), mask(mask_) {
        detail::require(n >= 2 && n <= kMaxQubits, "StabilizerIndex: n out of range");
        detail::require(mask != 0 && mask < (1u << n), "StabilizerIndex: mask out of range");
    }

    bool includes_x_generator() const { return mask & 1u; }

    bool operator==(const StabilizerIndex&) const = default;
};

/// All 2^n - 1 non-trivial stabilizers, in ascending mask order.
inline std::vector<StabilizerIndex> enumerate_stabilizers(int n) {
    detail::require(n >= 2 && n <= kMaxQubits, "enumerate_stabilizers: n out of range");
    std::vector<StabilizerIndex> out;
    out.reserve((size_t{1} << n) - 1);
    for (uint32_t mask = 1; mask < (1u << n); ++mask) out.emplace_back(n, mask);
    return out;
}

/// A signed n-qubit Pauli operator. letters[q] is the action on qubit q+1
/// (1-based numbering); sign is +1 or -1 -- stabilizer-group elements never
/// pick up a factor of i.
struct PauliString {
    int sign = +1;
    std::string letters;

    int n() const { return static_cast<int>(letters.size()); }

    /// Symplectic masks, bit q for qubit q+1. X and Y set x; Z and Y set z.
    uint32_t x_mask() const {
        uint32_t m = 0;
        for (int q = 0; q < n(); ++q)
            if (letters[q] == 'X' || letters[q] == 'Y') m |= 1u << q;
        return m;
    }
    uint32_t z_mask() const {
        uint32_t m = 0;
        for (int q = 0; q < n(); ++q)
            if (letters[q] == 'Z' || letters[q] == 'Y') m |= 1u << q;
        return m;
    }

    /// Non-identity support, bit q for qubit q+1.
    uint32_t support_mask() const { return x_mask() | z_mask(); }

    bool operator==(const PauliString&) const = default;
};

namespace detail {

/// Z-part support of the ZZ-generator product selected by `mask`, ignoring
/// the X generator bit. Qubit q+1 carries a Z iff exactly one of the two
/// adjacent generators touching it is selected.
inline uint32_t zz_product_support(int n, uint32_t mask) {
    uint32_t z = 0;
    for (int q = 1; q <= n; ++q) {
        bool left = q >= 2 && ((mask >> (q - 1)) & 1u);   // generator q = Z_{q-1} Z_q
        bool right = q <= n - 1 && ((mask >> q) & 1u);    // generator q+1 = Z_q Z_{q+1}
        if (left != right) z |= 1u << (q - 1);
    }
    return z;
}

/// n-qubit Pauli in symplectic form: i^{phase_exp} * X^{x} * Z^{z}.
struct SymplecticPauli {
    int phase_exp = 0; // exponent of i, mod 4
    uint32_t x = 0;
    uint32_t z = 0;

    /// Exact operator product this * other. Moving other's X part past this
    /// Z part contributes (-1) per overlapping qubit.
    SymplecticPauli operator*(const SymplecticPauli& other) const {
        SymplecticPauli r;
        r.phase_exp = (phase_exp + other.phase_exp + 2 * std::popcount(z & other.x)) & 3;
        r.x = x ^ other.x;
        r.z = z ^ other.z;
        return r;
    }
};

} // namespace detail

/// Expands a stabilizer index into its concrete signed Pauli string by
/// multiplying the selected generators left to right with exact phase
/// tracking over {1, i, -1, -i}.
inline PauliString stabilizer_to_pauli(const StabilizerIndex& s) {
    detail::SymplecticPauli acc;
    if (s.includes_x_generator()) acc.x = (1u << s.n) - 1;
    for (int i = 2; i <= s.n; ++i) {
        if (!((s.mask >> (i - 1)) & 1u)) continue;
        detail::SymplecticPauli zz;
        zz.z = (1u << (i - 2)) | (1u << (i - 1)); // Z_{i-1} Z_i
        acc = acc * zz;
    }
    // Rewrite each XZ qubit factor as a Y letter; XZ = -i Y, so each Y
    // contributes i^3 to the leftover scalar.
    int y_count = std::popcount(acc.x & acc.z);
    int phase = (acc.phase_exp + 3 * y_count) & 3;
    if (phase & 1) throw std::logic_error("stabilizer_to_pauli: non-real phase");

    PauliString p;
    p.sign = phase == 0 ? +1 : -1;
    p.letters.resize(s.n, 'I');
    for (int q = 0; q < s.n; ++q) {
        bool xb = (acc.x >> q) & 1u;
        bool zb = (acc.z >> q) & 1u;
        p.letters[q] = xb ? (zb ? 'Y' : 'X') : (zb ? 'Z' : 'I');
    }
    return p;
}

/// Number of non-identity letters of the stabilizer. n when the X generator
/// participates, otherwise the (even) support of the ZZ product.
inline int weight(const StabilizerIndex& s) {
    if (s.includes_x_generator()) return s.n;
    return std::popcount(detail::zz_product_support(s.n, s.mask));
}

/// Eigenvalue (+1/-1) of the signed stabilizer on a basis state: the product
/// of the label signs at the selected generator positions.
inline int stabilizer_eigenvalue(const StabilizerIndex& s, const BasisLabel& label) {
    return detail::parity(s.mask & label.code) ? -1 : +1;
}

} // namespace ghzforge
