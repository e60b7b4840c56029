#pragma once

#include <functional>
#include <string>

#include <json.hpp>

#include "ghzforge/protocol.hpp"

namespace ghzforge {

/// Protocol file format (.ghzp.json): a single self-describing JSON document
/// with a "root" node tree. Measurement masks are stored both as integers
/// and as signed Pauli strings; the two must agree on load.

struct ProtocolParseError : std::runtime_error {
    explicit ProtocolParseError(const std::string& where, const std::string& what)
        : std::runtime_error("protocol parse error at " + where + ": " + what) {}
};

namespace detail_serialize {

using nlohmann::json;

inline std::string pauli_to_string(const PauliString& p) {
    return (p.sign > 0 ? "+" : "-") + p.letters;
}

inline json node_to_json(const ProtocolNode& node) {
    json j;
    switch (node.kind) {
        case ProtocolNode::Kind::Leaf:
            j["type"] = "leaf";
            if (node.party_u >= 0) j["parties"] = {node.party_u, node.party_v};
            break;
        case ProtocolNode::Kind::Fuse:
            j["type"] = "fuse";
            j["i"] = node.i;
            j["j"] = node.j;
            j["left"] = node_to_json(*node.child0);
            j["right"] = node_to_json(*node.child1);
            break;
        case ProtocolNode::Kind::Measure:
            j["type"] = "measure";
            j["mask"] = node.mask;
            j["pauli"] = pauli_to_string(stabilizer_to_pauli(StabilizerIndex(node.n, node.mask)));
            if (!std::isnan(node.success_prob)) j["success_prob"] = node.success_prob;
            j["main"] = node_to_json(*node.child0);
            j["ancilla"] = node_to_json(*node.child1);
            break;
    }
    return j;
}

inline NodePtr node_from_json(const json& j, const std::string& path) {
    if (!j.is_object()) throw ProtocolParseError(path, "node is not an object");
    auto type_it = j.find("type");
    if (type_it == j.end()) throw ProtocolParseError(path + ".type", "missing field");
    const std::string type = type_it->is_string() ? type_it->get<std::string>() : "";

    auto get_int = [&](const char* field) -> int64_t {
        auto it = j.find(field);
        if (it == j.end() || !it->is_number_integer())
            throw ProtocolParseError(path + "." + field, "missing or non-integer field");
        return it->get<int64_t>();
    };

    if (type == "leaf") {
        int u = -1, v = -1;
        if (auto it = j.find("parties"); it != j.end()) {
            if (!it->is_array() || it->size() != 2)
                throw ProtocolParseError(path + ".parties", "expected a pair");
            u = (*it)[0].get<int>();
            v = (*it)[1].get<int>();
        }
        return make_leaf(u, v);
    }
    if (type == "fuse") {
        NodePtr left = node_from_json(j.at("left"), path + ".left");
        NodePtr right = node_from_json(j.at("right"), path + ".right");
        int64_t i = get_int("i"), jj = get_int("j");
        if (i < 0 || i >= left->n) throw ProtocolParseError(path + ".i", "fusion index out of range");
        if (jj < 0 || jj >= right->n) throw ProtocolParseError(path + ".j", "fusion index out of range");
        return make_fuse(std::move(left), std::move(right), static_cast<int>(i), static_cast<int>(jj));
    }
    if (type == "measure") {
        NodePtr main = node_from_json(j.at("main"), path + ".main");
        NodePtr ancilla = node_from_json(j.at("ancilla"), path + ".ancilla");
        int64_t mask = get_int("mask");
        if (mask <= 0 || mask >= (int64_t{1} << main->n))
            throw ProtocolParseError(path + ".mask", "mask exceeds 2^n - 1 or is zero");
        StabilizerIndex s(main->n, static_cast<uint32_t>(mask));
        if (ancilla->n != weight(s))
            throw ProtocolParseError(path + ".ancilla", "ancilla size != stabilizer weight");
        if (auto it = j.find("pauli"); it != j.end()) {
            if (it->get<std::string>() != pauli_to_string(stabilizer_to_pauli(s)))
                throw ProtocolParseError(path + ".pauli", "signed Pauli string disagrees with mask");
        }
        double sp = std::numeric_limits<double>::quiet_NaN();
        if (auto it = j.find("success_prob"); it != j.end()) sp = it->get<double>();
        return make_measure(std::move(main), std::move(ancilla), static_cast<uint32_t>(mask), sp);
    }
    throw ProtocolParseError(path + ".type", "unknown node type '" + type + "'");
}

} // namespace detail_serialize

inline constexpr int kProtocolFormatVersion = 1;

/// Serializes a protocol (leaf parties filled in) to a JSON text document.
/// `extra` entries, if any, are merged into the top-level object.
inline std::string serialize(const Protocol& p, const nlohmann::json& extra = {}) {
    Protocol q = with_parties(p);
    nlohmann::json j;
    j["version"] = kProtocolFormatVersion;
    j["n"] = q.n();
    j["k"] = q.k();
    if (!std::isnan(q.meta.search_fidelity)) j["search_fidelity"] = q.meta.search_fidelity;
    if (!std::isnan(q.meta.predicted_fidelity)) j["predicted_fidelity"] = q.meta.predicted_fidelity;
    if (!q.meta.algorithm.empty()) j["algorithm"] = q.meta.algorithm;
    if (!q.meta.generator.empty()) j["generator"] = q.meta.generator;
    if (q.meta.seed) j["seed"] = *q.meta.seed;
    j["root"] = detail_serialize::node_to_json(*q.root);
    if (extra.is_object())
        for (auto& [key, value] : extra.items()) j[key] = value;
    return j.dump(2) + "\n";
}

inline Protocol deserialize(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ProtocolParseError("byte " + std::to_string(e.byte), e.what());
    }
    if (!j.is_object()) throw ProtocolParseError("document", "not a JSON object");
    if (auto it = j.find("version"); it == j.end() || !it->is_number_integer())
        throw ProtocolParseError("version", "missing field");
    else if (it->get<int>() != kProtocolFormatVersion)
        throw ProtocolParseError("version", "unsupported version");
    if (j.find("root") == j.end()) throw ProtocolParseError("root", "missing field");

    Protocol p;
    p.root = detail_serialize::node_from_json(j["root"], "root");
    if (auto it = j.find("n"); it != j.end() && it->get<int>() != p.n())
        throw ProtocolParseError("n", "declared n disagrees with tree");
    if (auto it = j.find("k"); it != j.end() && it->get<int>() != p.k())
        throw ProtocolParseError("k", "declared k disagrees with tree");
    if (auto it = j.find("search_fidelity"); it != j.end()) p.meta.search_fidelity = it->get<double>();
    if (auto it = j.find("predicted_fidelity"); it != j.end()) p.meta.predicted_fidelity = it->get<double>();
    if (auto it = j.find("algorithm"); it != j.end()) p.meta.algorithm = it->get<std::string>();
    if (auto it = j.find("generator"); it != j.end()) p.meta.generator = it->get<std::string>();
    if (auto it = j.find("seed"); it != j.end()) p.meta.seed = it->get<uint64_t>();
    audit(p);

    // Declared leaf parties, when present, must match the wiring.
    std::vector<std::pair<int, int>> declared;
    bool any_declared = false;
    // Preorder walk mirroring finalize_parties' leaf order.
    std::function<void(const ProtocolNode&)> walk = [&](const ProtocolNode& node) {
        if (node.kind == ProtocolNode::Kind::Leaf) {
            declared.emplace_back(node.party_u, node.party_v);
            if (node.party_u >= 0) any_declared = true;
            return;
        }
        walk(*node.child0);
        walk(*node.child1);
    };
    walk(*p.root);
    if (any_declared) {
        auto expected = finalize_parties(p);
        for (size_t idx = 0; idx < expected.size(); ++idx) {
            if (declared[idx].first >= 0 && declared[idx] != expected[idx])
                throw ProtocolParseError("root", "leaf parties disagree with wiring at leaf " + std::to_string(idx));
        }
    }
    return p;
}

/// Stable identifier of a protocol's structure: FNV-1a over the canonical
/// serialization of the tree alone (no metadata).
inline std::string protocol_id(const Protocol& p) {
    nlohmann::json j = detail_serialize::node_to_json(*with_parties(p).root);
    std::string text = j.dump();
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    static const char* hex = "0123456789abcdef";
    for (int idx = 15; idx >= 0; --idx) {
        buf[idx] = hex[h & 0xf];
        h >>= 4;
    }
    buf[16] = '\0';
    return std::string(buf);
}

} // namespace ghzforge
