#pragma once

#include <ghzforge/basis.hpp>
#include <ghzforge/rng.hpp>

namespace testutil {

/// Random point on the probability simplex (normalized exponentials), a
/// generic GHZ-diagonal state for property tests.
inline ghzforge::GhzDiagState random_state(int n, ghzforge::SplitMix64& rng) {
    std::vector<double> coeffs(size_t{1} << n);
    double sum = 0.0;
    for (double& c : coeffs) {
        c = -std::log(1.0 - rng.next_double());
        sum += c;
    }
    for (double& c : coeffs) c /= sum;
    return ghzforge::GhzDiagState(n, std::move(coeffs));
}

inline double max_coeff_diff(const ghzforge::GhzDiagState& a, const ghzforge::GhzDiagState& b) {
    double mx = 0.0;
    for (size_t i = 0; i < a.coeffs.size(); ++i) mx = std::max(mx, std::abs(a.coeffs[i] - b.coeffs[i]));
    return mx;
}

} // namespace testutil
