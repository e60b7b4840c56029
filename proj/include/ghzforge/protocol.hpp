#pragma once

#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "ghzforge/ops.hpp"

namespace ghzforge {

struct ProtocolNode;
using NodePtr = std::shared_ptr<const ProtocolNode>;

/// One node of a protocol tree. Nodes are immutable and freely shared
/// between protocols (a state consumed twice appears as the same pointer
/// twice; it still means two independent preparations).
struct ProtocolNode {
    enum class Kind { Leaf, Fuse, Measure };

    Kind kind = Kind::Leaf;
    int n = 2; // qubits spanned
    int k = 1; // Bell-pair leaves consumed

    // Leaf: network parties holding the pair, -1 until assigned.
    int party_u = -1;
    int party_v = -1;

    // Fuse: child0 = surviving state (CNOT controls), child1 = state whose
    // qubit j is measured out. Measure: child0 = main, child1 = ancilla.
    NodePtr child0;
    NodePtr child1;
    int i = 0;
    int j = 0;
    uint32_t mask = 0;

    // Success probability of the +1 branch at the fidelity the protocol was
    // searched at; NaN when never evaluated (e.g. hand-built protocols).
    double success_prob = std::numeric_limits<double>::quiet_NaN();
};

inline NodePtr make_leaf(int party_u = -1, int party_v = -1) {
    auto node = std::make_shared<ProtocolNode>();
    node->kind = ProtocolNode::Kind::Leaf;
    node->n = 2;
    node->k = 1;
    node->party_u = party_u;
    node->party_v = party_v;
    return node;
}

inline NodePtr make_fuse(NodePtr left, NodePtr right, int i, int j) {
    detail::require(left && right, "make_fuse: null child");
    FusionSpec spec(left->n, i, right->n, j); // validates bounds
    auto node = std::make_shared<ProtocolNode>();
    node->kind = ProtocolNode::Kind::Fuse;
    node->n = spec.n_out();
    node->k = left->k + right->k;
    node->child0 = std::move(left);
    node->child1 = std::move(right);
    node->i = i;
    node->j = j;
    return node;
}

inline NodePtr make_measure(NodePtr main, NodePtr ancilla, uint32_t mask,
                            double success_prob = std::numeric_limits<double>::quiet_NaN()) {
    detail::require(main && ancilla, "make_measure: null child");
    StabilizerIndex s(main->n, mask);
    detail::require(ancilla->n == weight(s), "make_measure: ancilla size != stabilizer weight");
    auto node = std::make_shared<ProtocolNode>();
    node->kind = ProtocolNode::Kind::Measure;
    node->n = main->n;
    node->k = main->k + ancilla->k;
    node->child0 = std::move(main);
    node->child1 = std::move(ancilla);
    node->mask = mask;
    node->success_prob = success_prob;
    return node;
}

struct ProtocolMeta {
    double search_fidelity = std::numeric_limits<double>::quiet_NaN();
    double predicted_fidelity = std::numeric_limits<double>::quiet_NaN();
    std::string algorithm;                // "base", "random", "baseline", ...
    std::string generator;                // PRNG name, e.g. "splitmix64"
    std::optional<uint64_t> seed;
};

/// A protocol tree plus provenance. Leaf count and party span are derived
/// from the root so they can never drift from the structure.
struct Protocol {
    NodePtr root;
    ProtocolMeta meta;

    int n() const { return root ? root->n : 0; }
    int k() const { return root ? root->k : 0; }
};

/// Thrown by evaluate() when a measurement branch has probability zero; the
/// path pinpoints the offending node, e.g. "root.main.ancilla".
struct ImpossibleBranchError : std::runtime_error {
    std::string node_path;
    explicit ImpossibleBranchError(std::string path)
        : std::runtime_error("evaluate: success probability 0 at " + path), node_path(std::move(path)) {}
};

struct EvaluationResult {
    GhzDiagState state;
    std::vector<double> node_success_probs; // Measure instances, preorder
};

namespace detail_protocol {

inline GhzDiagState evaluate_node(const ProtocolNode& node, double f_bell,
                                  std::vector<double>& probs, std::string& path) {
    switch (node.kind) {
        case ProtocolNode::Kind::Leaf:
            return isotropic_bell(f_bell);
        case ProtocolNode::Kind::Fuse: {
            size_t len = path.size();
            path += ".left";
            GhzDiagState left = evaluate_node(*node.child0, f_bell, probs, path);
            path.resize(len);
            path += ".right";
            GhzDiagState right = evaluate_node(*node.child1, f_bell, probs, path);
            path.resize(len);
            return fuse(left, node.i, right, node.j);
        }
        case ProtocolNode::Kind::Measure: {
            size_t len = path.size();
            // Record the slot now so instance order is preorder.
            size_t slot = probs.size();
            probs.push_back(0.0);
            path += ".main";
            GhzDiagState main = evaluate_node(*node.child0, f_bell, probs, path);
            path.resize(len);
            path += ".ancilla";
            GhzDiagState ancilla = evaluate_node(*node.child1, f_bell, probs, path);
            path.resize(len);
            MeasurementResult r = measure_stabilizer(main, StabilizerIndex(node.n, node.mask), ancilla);
            probs[slot] = r.success_prob;
            if (!r.post_state) throw ImpossibleBranchError(path);
            return std::move(*r.post_state);
        }
    }
    throw std::logic_error("evaluate_node: bad node kind");
}

} // namespace detail_protocol

/// Replays the protocol bottom-up with isotropic leaves of fidelity f_bell.
inline EvaluationResult evaluate(const Protocol& p, double f_bell) {
    detail::require(p.root != nullptr, "evaluate: empty protocol");
    EvaluationResult result;
    std::string path = "root";
    result.state = detail_protocol::evaluate_node(*p.root, f_bell, result.node_success_probs, path);
    return result;
}

/// Party pair of every leaf, in preorder. The root spans parties 0..n-1 in
/// output-qubit order; fusion and measurement wiring distribute them to the
/// subtrees exactly as the coefficient ops do.
namespace detail_protocol {

inline void assign_parties(const ProtocolNode& node, const std::vector<int>& parties,
                           std::vector<std::pair<int, int>>& out) {
    switch (node.kind) {
        case ProtocolNode::Kind::Leaf:
            out.emplace_back(parties[0], parties[1]);
            return;
        case ProtocolNode::Kind::Fuse: {
            const int nL = node.child0->n;
            const int nR = node.child1->n;
            std::vector<int> left(parties.begin(), parties.begin() + nL);
            std::vector<int> right(static_cast<size_t>(nR));
            for (int q = 0; q < nR; ++q) {
                if (q < node.j)
                    right[q] = parties[nL + q];
                else if (q == node.j)
                    right[q] = parties[node.i];
                else
                    right[q] = parties[nL + q - 1];
            }
            assign_parties(*node.child0, left, out);
            assign_parties(*node.child1, right, out);
            return;
        }
        case ProtocolNode::Kind::Measure: {
            const PauliString pauli = stabilizer_to_pauli(StabilizerIndex(node.n, node.mask));
            std::vector<int> ancilla_parties;
            for (int q = 0; q < node.n; ++q)
                if (pauli.letters[q] != 'I') ancilla_parties.push_back(parties[q]);
            assign_parties(*node.child0, parties, out);
            assign_parties(*node.child1, ancilla_parties, out);
            return;
        }
    }
}

inline NodePtr rebuild_with_parties(const ProtocolNode& node, const std::vector<int>& parties) {
    switch (node.kind) {
        case ProtocolNode::Kind::Leaf:
            return make_leaf(parties[0], parties[1]);
        case ProtocolNode::Kind::Fuse: {
            const int nL = node.child0->n;
            const int nR = node.child1->n;
            std::vector<int> left(parties.begin(), parties.begin() + nL);
            std::vector<int> right(static_cast<size_t>(nR));
            for (int q = 0; q < nR; ++q) {
                if (q < node.j)
                    right[q] = parties[nL + q];
                else if (q == node.j)
                    right[q] = parties[node.i];
                else
                    right[q] = parties[nL + q - 1];
            }
            return make_fuse(rebuild_with_parties(*node.child0, left),
                             rebuild_with_parties(*node.child1, right), node.i, node.j);
        }
        case ProtocolNode::Kind::Measure: {
            const PauliString pauli = stabilizer_to_pauli(StabilizerIndex(node.n, node.mask));
            std::vector<int> ancilla_parties;
            for (int q = 0; q < node.n; ++q)
                if (pauli.letters[q] != 'I') ancilla_parties.push_back(parties[q]);
            return make_measure(rebuild_with_parties(*node.child0, parties),
                                rebuild_with_parties(*node.child1, ancilla_parties), node.mask,
                                node.success_prob);
        }
    }
    throw std::logic_error("rebuild_with_parties: bad node kind");
}

} // namespace detail_protocol

inline std::vector<std::pair<int, int>> finalize_parties(const Protocol& p) {
    detail::require(p.root != nullptr, "finalize_parties: empty protocol");
    std::vector<int> parties(static_cast<size_t>(p.n()));
    for (int q = 0; q < p.n(); ++q) parties[q] = q;
    std::vector<std::pair<int, int>> out;
    out.reserve(static_cast<size_t>(p.k()));
    detail_protocol::assign_parties(*p.root, parties, out);
    return out;
}

/// Copy of the protocol with every leaf's party pair filled in.
inline Protocol with_parties(const Protocol& p) {
    detail::require(p.root != nullptr, "with_parties: empty protocol");
    std::vector<int> parties(static_cast<size_t>(p.n()));
    for (int q = 0; q < p.n(); ++q) parties[q] = q;
    Protocol out = p;
    out.root = detail_protocol::rebuild_with_parties(*p.root, parties);
    return out;
}

/// Structural audit: recomputes n/k bottom-up and checks the measurement
/// weight constraint at every node. Throws std::logic_error on violation.
namespace detail_protocol {

inline void audit_node(const ProtocolNode& node) {
    switch (node.kind) {
        case ProtocolNode::Kind::Leaf:
            if (node.n != 2 || node.k != 1) throw std::logic_error("audit: corrupt leaf");
            return;
        case ProtocolNode::Kind::Fuse:
            audit_node(*node.child0);
            audit_node(*node.child1);
            if (node.n != node.child0->n + node.child1->n - 1) throw std::logic_error("audit: fuse span mismatch");
            if (node.k != node.child0->k + node.child1->k) throw std::logic_error("audit: fuse leaf-count mismatch");
            if (node.i < 0 || node.i >= node.child0->n || node.j < 0 || node.j >= node.child1->n)
                throw std::logic_error("audit: fuse index out of range");
            return;
        case ProtocolNode::Kind::Measure: {
            audit_node(*node.child0);
            audit_node(*node.child1);
            StabilizerIndex s(node.child0->n, node.mask);
            if (node.n != node.child0->n) throw std::logic_error("audit: measure span mismatch");
            if (node.k != node.child0->k + node.child1->k) throw std::logic_error("audit: measure leaf-count mismatch");
            if (node.child1->n != weight(s)) throw std::logic_error("audit: measure ancilla size mismatch");
            return;
        }
    }
    throw std::logic_error("audit: bad node kind");
}

} // namespace detail_protocol

inline void audit(const Protocol& p) {
    detail::require(p.root != nullptr, "audit: empty protocol");
    detail_protocol::audit_node(*p.root);
}

} // namespace ghzforge
