#pragma once

#include <cstdint>

namespace ghzforge {

/// SplitMix64 (Steele, Lea & Flood / Vigna). Counter-based, so independent
/// streams can be derived from (seed, index) pairs and results are identical
/// on every platform. Good enough statistically for the sampling done here.
class SplitMix64 {
public:
    explicit SplitMix64(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1), 53-bit resolution.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, bound). bound must be > 0.
    uint64_t next_below(uint64_t bound) {
        // Rejection-free modulo is biased for huge bounds; all bounds used
        // here are tiny (< 2^20), where the bias is immeasurable, but use
        // rejection anyway so streams stay exactly reproducible by contract.
        uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            uint64_t r = next_u64();
            if (r >= threshold) return r % bound;
        }
    }

    /// Derives an unrelated stream, e.g. per run, per temperature, per shot.
    static uint64_t derive(uint64_t seed, uint64_t index) {
        SplitMix64 g(seed ^ (0xa0761d6478bd642fULL + index * 0xe7037ed1a0b428dbULL));
        return g.next_u64();
    }

    static constexpr const char* kName = "splitmix64";

private:
    uint64_t state_;
};

} // namespace ghzforge
