#pragma once

#include "ghzforge/protocol.hpp"

namespace ghzforge {

/// Reconstructions of the two published 4-party reference protocols
/// (22 and 42 Bell pairs). Staged structure:
///   1. two purified pairs on opposite sides (A-B and C-D),
///   2. purified pairs in the other direction (B-C and A-D),
///   3. fusion into the 4-qubit GHZ, consuming the A-D pair in a Z_A Z_D
///      measurement right after,
///   4. fresh purified B-C and A-D pairs,
///   5. two final ZZ measurements (Z_B Z_C, then Z_A Z_D).
/// Only the pair counts and the staged shape are contractual; the internal
/// distillation blocks are double-selection-style sequences sized to match
/// the published totals.

namespace detail_baselines {

inline constexpr uint32_t kMaskXX2 = 0b01; // X1 X2 on a pair
inline constexpr uint32_t kMaskZZ2 = 0b10; // Z1 Z2 on a pair
inline constexpr uint32_t kMaskYY2 = 0b11; // -Y1 Y2 on a pair

inline NodePtr once_purified(uint32_t mask) {
    return make_measure(make_leaf(), make_leaf(), mask);
}

/// 3 pairs: raw pair distilled by a ZZ then an XX round with raw ancillas.
inline NodePtr block3() {
    return make_measure(make_measure(make_leaf(), make_leaf(), kMaskZZ2), make_leaf(), kMaskXX2);
}

/// 4 pairs: XX parity check between two ZZ-purified pairs.
inline NodePtr block4() {
    return make_measure(once_purified(kMaskZZ2), once_purified(kMaskZZ2), kMaskXX2);
}

/// 5 pairs: ZZ then XX rounds, each consuming a ZZ-purified ancilla.
inline NodePtr block5() {
    NodePtr p = make_leaf();
    p = make_measure(p, once_purified(kMaskZZ2), kMaskZZ2);
    p = make_measure(p, once_purified(kMaskZZ2), kMaskXX2);
    return p;
}

/// 8 pairs: XX parity check between two 4-pair halves, each half a ZZ check
/// between an XX- and a YY-purified pair.
inline NodePtr block8() {
    auto half = [] {
        return make_measure(once_purified(kMaskXX2), once_purified(kMaskYY2), kMaskZZ2);
    };
    return make_measure(half(), half(), kMaskXX2);
}

inline Protocol assemble(NodePtr ab, NodePtr cd, NodePtr bc, NodePtr ad, NodePtr bc2, NodePtr ad2,
                         const char* name) {
    // Z_A Z_D = Z1 Z4 (generators 2,3,4), Z_B Z_C = Z2 Z3 (generator 3).
    constexpr uint32_t kMaskZ14 = 0b1110;
    constexpr uint32_t kMaskZ23 = 0b0100;
    NodePtr ghz = make_fuse(make_fuse(std::move(ab), std::move(bc), 1, 0), std::move(cd), 2, 0);
    NodePtr root = make_measure(std::move(ghz), std::move(ad), kMaskZ14);
    root = make_measure(std::move(root), std::move(bc2), kMaskZ23);
    root = make_measure(std::move(root), std::move(ad2), kMaskZ14);
    Protocol p;
    p.root = std::move(root);
    p.meta.algorithm = name;
    return p;
}

} // namespace detail_baselines

/// 4-party baseline consuming 22 Bell pairs.
inline Protocol expedient() {
    using namespace detail_baselines;
    return assemble(block3(), block3(), block4(), block4(), block4(), block4(), "expedient");
}

/// 4-party baseline consuming 42 Bell pairs.
inline Protocol stringent() {
    using namespace detail_baselines;
    return assemble(block5(), block5(), block8(), block8(), block8(), block8(), "stringent");
}

} // namespace ghzforge
