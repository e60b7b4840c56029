#pragma once

#include <algorithm>
#include <thread>

#include "ghzforge/protocol.hpp"
#include "ghzforge/rng.hpp"

namespace ghzforge {

struct McReport {
    uint64_t shots = 0;
    double mean_steps = 0.0;
    double stderr_steps = 0.0;
    uint32_t p50 = 0;
    uint32_t p90 = 0;
    uint32_t p99 = 0;
    uint32_t schedule_length = 0;          // steps when every measurement succeeds
    std::vector<double> node_retry_means;  // mean failures per Measure instance, preorder
};

namespace detail_mc {

/// Flattened execution plan. Shared subtree pointers are expanded: every
/// occurrence runs independently. Preorder indexing, so a node's subtree is
/// the contiguous range [index, subtree_end).
struct PlanNode {
    ProtocolNode::Kind kind;
    int child0 = -1;
    int child1 = -1;
    int subtree_end = 0;
    double success = 1.0;
    int measure_slot = -1;
    int party_u = -1;
    int party_v = -1;
};

struct Plan {
    std::vector<PlanNode> nodes;   // preorder
    std::vector<int> postorder;    // node indices, children before parents
    std::vector<int> leaves;       // node indices in preorder (= scan priority)
    int measure_count = 0;
    int n_parties = 0;
};

inline int build_plan_node(const ProtocolNode& node, const std::vector<std::pair<int, int>>& leaf_parties,
                           size_t& leaf_cursor, const std::vector<double>& probs, size_t& prob_cursor,
                           Plan& plan) {
    const int index = static_cast<int>(plan.nodes.size());
    plan.nodes.emplace_back();
    plan.nodes[index].kind = node.kind;
    switch (node.kind) {
        case ProtocolNode::Kind::Leaf: {
            auto [u, v] = leaf_parties[leaf_cursor++];
            plan.nodes[index].party_u = u;
            plan.nodes[index].party_v = v;
            plan.leaves.push_back(index);
            break;
        }
        case ProtocolNode::Kind::Fuse: {
            int c0 = build_plan_node(*node.child0, leaf_parties, leaf_cursor, probs, prob_cursor, plan);
            int c1 = build_plan_node(*node.child1, leaf_parties, leaf_cursor, probs, prob_cursor, plan);
            plan.nodes[index].child0 = c0;
            plan.nodes[index].child1 = c1;
            break;
        }
        case ProtocolNode::Kind::Measure: {
            plan.nodes[index].measure_slot = plan.measure_count++;
            plan.nodes[index].success = probs[prob_cursor++];
            int c0 = build_plan_node(*node.child0, leaf_parties, leaf_cursor, probs, prob_cursor, plan);
            int c1 = build_plan_node(*node.child1, leaf_parties, leaf_cursor, probs, prob_cursor, plan);
            plan.nodes[index].child0 = c0;
            plan.nodes[index].child1 = c1;
            break;
        }
    }
    plan.nodes[index].subtree_end = static_cast<int>(plan.nodes.size());
    return index;
}

inline void postorder_of(const Plan& plan, int index, std::vector<int>& out) {
    const PlanNode& node = plan.nodes[index];
    if (node.child0 >= 0) postorder_of(plan, node.child0, out);
    if (node.child1 >= 0) postorder_of(plan, node.child1, out);
    out.push_back(index);
}

inline Plan build_plan(const Protocol& p, double f_bell) {
    Plan plan;
    plan.n_parties = p.n();
    auto leaf_parties = finalize_parties(p);
    EvaluationResult eval = evaluate(p, f_bell);
    size_t leaf_cursor = 0, prob_cursor = 0;
    build_plan_node(*p.root, leaf_parties, leaf_cursor, eval.node_success_probs, prob_cursor, plan);
    postorder_of(plan, 0, plan.postorder);
    return plan;
}

/// One full protocol execution. Each time step, pending leaves fire in
/// preorder priority subject to one-generation-per-party; completed
/// measurements roll once, and a failure resets exactly its subtree.
struct ShotRunner {
    const Plan& plan;
    std::vector<uint8_t> done;
    std::vector<uint64_t>* retry_counts; // optional, per measure slot

    explicit ShotRunner(const Plan& p, std::vector<uint64_t>* retries = nullptr)
        : plan(p), done(p.nodes.size()), retry_counts(retries) {}

    uint32_t run(SplitMix64* rng) {
        std::fill(done.begin(), done.end(), uint8_t{0});
        uint32_t steps = 0;
        const int root = 0;
        while (!done[root]) {
            ++steps;
            uint32_t parties_busy = 0;
            for (int leaf : plan.leaves) {
                if (done[leaf]) continue;
                const PlanNode& node = plan.nodes[leaf];
                const uint32_t mask = (1u << node.party_u) | (1u << node.party_v);
                if (parties_busy & mask) continue;
                parties_busy |= mask;
                done[leaf] = 1;
            }
            for (int index : plan.postorder) {
                const PlanNode& node = plan.nodes[index];
                if (done[index] || node.kind == ProtocolNode::Kind::Leaf) continue;
                if (!done[node.child0] || !done[node.child1]) continue;
                if (node.kind == ProtocolNode::Kind::Fuse) {
                    done[index] = 1;
                    continue;
                }
                const bool success = rng == nullptr || rng->next_double() < node.success;
                if (success) {
                    done[index] = 1;
                } else {
                    if (retry_counts) (*retry_counts)[node.measure_slot]++;
                    std::fill(done.begin() + index, done.begin() + node.subtree_end, uint8_t{0});
                }
            }
        }
        return steps;
    }
};

} // namespace detail_mc

/// Simulates `shots` independent executions of the protocol at the given
/// Bell fidelity and reports generation-step statistics. Time unit: one Bell
/// generation round; gates and classical communication are free. Per-shot
/// RNG streams are derived from (seed, shot index), so results do not depend
/// on the thread count.
inline McReport monte_carlo(const Protocol& p, double f_bell, uint64_t shots, uint64_t seed,
                            int threads = 1) {
    detail::require(shots >= 1, "monte_carlo: shots must be >= 1");
    detail_mc::Plan plan = detail_mc::build_plan(p, f_bell);

    McReport report;
    report.shots = shots;
    {
        detail_mc::ShotRunner runner(plan);
        report.schedule_length = runner.run(nullptr);
    }

    std::vector<uint32_t> durations(shots);
    std::vector<uint64_t> retries(plan.measure_count, 0);

    int n_threads = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
    if (n_threads < 1) n_threads = 1;
    n_threads = static_cast<int>(std::min<uint64_t>(n_threads, shots));

    auto worker = [&](uint64_t begin, uint64_t end, std::vector<uint64_t>& local_retries) {
        detail_mc::ShotRunner runner(plan, &local_retries);
        for (uint64_t shot = begin; shot < end; ++shot) {
            SplitMix64 rng(SplitMix64::derive(seed, shot));
            durations[shot] = runner.run(&rng);
        }
    };
    if (n_threads == 1) {
        worker(0, shots, retries);
    } else {
        std::vector<std::vector<uint64_t>> thread_retries(n_threads, retries);
        std::vector<std::thread> pool;
        uint64_t chunk = (shots + n_threads - 1) / n_threads;
        for (int t = 0; t < n_threads; ++t) {
            uint64_t begin = t * chunk, end = std::min(shots, begin + chunk);
            pool.emplace_back(worker, begin, end, std::ref(thread_retries[t]));
        }
        for (auto& th : pool) th.join();
        for (auto& local : thread_retries)
            for (size_t s = 0; s < retries.size(); ++s) retries[s] += local[s];
    }

    unsigned long long sum = 0, sum_sq = 0;
    for (uint32_t d : durations) {
        sum += d;
        sum_sq += static_cast<unsigned long long>(d) * d;
    }
    report.mean_steps = static_cast<double>(sum) / static_cast<double>(shots);
    if (shots > 1) {
        // Exact integer arithmetic so identical samples give exactly zero.
        __int128 numer = static_cast<__int128>(sum_sq) * shots - static_cast<__int128>(sum) * sum;
        double variance = static_cast<double>(numer) / (static_cast<double>(shots) * (shots - 1));
        report.stderr_steps = std::sqrt(std::max(0.0, variance) / static_cast<double>(shots));
    }

    std::vector<uint32_t> sorted = durations;
    std::sort(sorted.begin(), sorted.end());
    auto rank = [&](double q) {
        uint64_t idx = static_cast<uint64_t>(std::ceil(q * static_cast<double>(shots)));
        return sorted[idx == 0 ? 0 : idx - 1];
    };
    report.p50 = rank(0.50);
    report.p90 = rank(0.90);
    report.p99 = rank(0.99);

    report.node_retry_means.resize(retries.size());
    for (size_t s = 0; s < retries.size(); ++s)
        report.node_retry_means[s] = static_cast<double>(retries[s]) / static_cast<double>(shots);
    return report;
}

} // namespace ghzforge
