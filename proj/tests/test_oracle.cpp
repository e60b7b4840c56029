#include <catch_amalgamated.hpp>

#include <ghzforge/oracle.hpp>

#include "support/test_util.hpp"

using namespace ghzforge;
using oracle::DenseState;

namespace {

double amp_at(const DenseState& s, uint32_t idx) { return s.amplitudes[idx].real(); }

} // namespace

TEST_CASE("basis_ket matches the 3-qubit table") {
    const double r = std::sqrt(0.5);
    struct Row {
        uint32_t code;
        uint32_t lo, hi; // computational indices
        double hi_sign;
    };
    // Codes: bit0 = s1 (X-type), bit1 = s2 (Z1Z2), bit2 = s3 (Z2Z3).
    std::vector<Row> rows = {
        {0b000, 0b000, 0b111, +1}, // +++ : (|000> + |111>)/sqrt2
        {0b100, 0b001, 0b110, +1}, // ++- : (|001> + |110>)/sqrt2
        {0b010, 0b011, 0b100, +1}, // +-+ : (|011> + |100>)/sqrt2
        {0b110, 0b010, 0b101, +1}, // +-- : (|010> + |101>)/sqrt2
        {0b001, 0b000, 0b111, -1}, // -++ : (|000> - |111>)/sqrt2
        {0b101, 0b001, 0b110, -1}, // -+- : (|001> - |110>)/sqrt2
        {0b011, 0b011, 0b100, -1}, // --+ : (|011> - |100>)/sqrt2
        {0b111, 0b010, 0b101, -1}, // --- : (|010> - |101>)/sqrt2
    };
    for (const Row& row : rows) {
        DenseState ket = oracle::basis_ket(BasisLabel(3, row.code));
        for (uint32_t idx = 0; idx < 8; ++idx) {
            double expected = idx == row.lo ? r : idx == row.hi ? row.hi_sign * r : 0.0;
            REQUIRE(amp_at(ket, idx) == expected);
            REQUIRE(ket.amplitudes[idx].imag() == 0.0);
        }
    }
}

TEST_CASE("basis_ket 2-qubit specialization") {
    DenseState ket = oracle::basis_ket(BasisLabel(2, 0b01)); // -+
    REQUIRE(amp_at(ket, 0b00) == std::sqrt(0.5));
    REQUIRE(amp_at(ket, 0b11) == -std::sqrt(0.5));
    REQUIRE(amp_at(ket, 0b01) == 0.0);
    REQUIRE(amp_at(ket, 0b10) == 0.0);
}

TEST_CASE("ghz_basis_decompose") {
    SECTION("indicator on basis kets") {
        for (uint32_t code = 0; code < 16; ++code) {
            auto d = oracle::ghz_basis_decompose(oracle::basis_ket(BasisLabel(4, code)));
            for (uint32_t c = 0; c < 16; ++c) REQUIRE(d.coeffs[c] == Catch::Approx(c == code ? 1.0 : 0.0).margin(1e-14));
            REQUIRE(d.off_diagonal < 1e-14);
        }
    }
    SECTION("Z on qubit 1 flips the X-type sign") {
        DenseState ket = oracle::basis_ket(BasisLabel(3, 0));
        const uint32_t q1 = 1u << oracle::gates::bit_of(3, 1);
        for (uint32_t idx = 0; idx < 8; ++idx)
            if (idx & q1) ket.amplitudes[idx] = -ket.amplitudes[idx];
        auto d = oracle::ghz_basis_decompose(ket);
        REQUIRE(d.coeffs[0b001] == Catch::Approx(1.0).margin(1e-14));
    }
    SECTION("completeness on a random unit vector") {
        SplitMix64 rng(7);
        DenseState psi(4);
        double norm = 0.0;
        for (auto& a : psi.amplitudes) {
            a = {rng.next_double() - 0.5, rng.next_double() - 0.5};
            norm += std::norm(a);
        }
        for (auto& a : psi.amplitudes) a /= std::sqrt(norm);
        auto d = oracle::ghz_basis_decompose(psi);
        double sum = 0.0;
        for (double c : d.coeffs) sum += c;
        REQUIRE(sum == Catch::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("oracle_fuse on perfect pairs gives a perfect GHZ") {
    auto out = oracle::oracle_fuse(isotropic_bell(1.0), 1, isotropic_bell(1.0), 0);
    REQUIRE(out.n == 3);
    REQUIRE(out.coeffs[0] == Catch::Approx(1.0).margin(1e-12));
    for (size_t c = 1; c < out.coeffs.size(); ++c) REQUIRE(out.coeffs[c] < 1e-12);
}

TEST_CASE("oracle linearity on mixtures") {
    SplitMix64 rng(11);
    auto a = testutil::random_state(2, rng);
    auto b = testutil::random_state(3, rng);

    auto mixed = oracle::oracle_fuse(a, 0, b, 2);
    std::vector<double> expected(mixed.coeffs.size(), 0.0);
    for (uint32_t la = 0; la < 4; ++la) {
        GhzDiagState da(2, {0, 0, 0, 0});
        da.coeffs[la] = 1.0;
        for (uint32_t lb = 0; lb < 8; ++lb) {
            GhzDiagState db(3, std::vector<double>(8, 0.0));
            db.coeffs[lb] = 1.0;
            auto part = oracle::oracle_fuse(da, 0, db, 2);
            for (size_t c = 0; c < expected.size(); ++c)
                expected[c] += a.coeffs[la] * b.coeffs[lb] * part.coeffs[c];
        }
    }
    for (size_t c = 0; c < expected.size(); ++c)
        REQUIRE(mixed.coeffs[c] == Catch::Approx(expected[c]).margin(1e-10));
}

TEST_CASE("oracle_measure basics") {
    SECTION("+1 eigenstate is unchanged with certainty") {
        GhzDiagState main(4, std::vector<double>(16, 0.0));
        main.coeffs[0] = 1.0;
        auto r = oracle::oracle_measure(main, StabilizerIndex(4, 0b0010), isotropic_bell(1.0));
        REQUIRE(r.success_prob == Catch::Approx(1.0).margin(1e-12));
        REQUIRE(r.post_state.has_value());
        REQUIRE(r.post_state->coeffs[0] == Catch::Approx(1.0).margin(1e-12));
    }
    SECTION("-1 eigenstate never passes") {
        GhzDiagState main(3, std::vector<double>(8, 0.0));
        main.coeffs[0b010] = 1.0; // |phi^{+-+}>, Z1 Z2 eigenvalue -1
        auto r = oracle::oracle_measure(main, StabilizerIndex(3, 0b010), isotropic_bell(1.0));
        REQUIRE(r.success_prob < 1e-12);
    }
    SECTION("the -YY stabilizer's sign enters the outcome") {
        // mask 3 on two qubits realizes -Y(x)Y; the sign flips the joint
        // outcome, so a perfect pair still passes with certainty.
        auto r = oracle::oracle_measure(isotropic_bell(1.0), StabilizerIndex(2, 0b11), isotropic_bell(1.0));
        REQUIRE(r.success_prob == Catch::Approx(1.0).margin(1e-12));
        REQUIRE(r.post_state->fidelity() == Catch::Approx(1.0).margin(1e-12));
        // Distillation with ZZ on isotropic pairs must beat the input fidelity.
        auto zz = oracle::oracle_measure(isotropic_bell(0.9), StabilizerIndex(2, 0b10), isotropic_bell(0.9));
        REQUIRE(zz.post_state->fidelity() > 0.9);
    }
}

TEST_CASE("oracle outputs stay GHZ diagonal") {
    SplitMix64 rng(23);
    for (int trial = 0; trial < 5; ++trial) {
        auto a = testutil::random_state(3, rng);
        auto b = testutil::random_state(2, rng);
        double residual = 1.0;
        auto fused = oracle::oracle_fuse(a, 2, b, 1, &residual);
        REQUIRE(fused.is_valid(1e-9));
        REQUIRE(residual < 1e-10);

        auto main = testutil::random_state(3, rng);
        auto anc = testutil::random_state(2, rng);
        auto r = oracle::oracle_measure(main, StabilizerIndex(3, 0b010), anc);
        REQUIRE(r.off_diagonal < 1e-10);
        if (r.post_state) REQUIRE(r.post_state->is_valid(1e-9));
    }
}
