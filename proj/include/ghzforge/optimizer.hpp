#pragma once

#include <atomic>
#include <cmath>
#include <thread>

#include "ghzforge/protocol.hpp"
#include "ghzforge/rng.hpp"

namespace ghzforge {

/// One stored search result: the protocol, its exact state at the search
/// fidelity, and the two tracked figures of merit. Ranking uses fidelity
/// only; the success product is carried along for reporting.
struct DpEntry {
    NodePtr protocol;
    GhzDiagState state;
    double fidelity = 0.0;
    double success_product = 1.0;
};

struct DpCell {
    std::vector<DpEntry> entries;
};

/// Search grid over {(n, k) : 2 <= n <= n_max, n-1 <= k <= k_max}. Cell
/// (2,1) holds exactly the raw isotropic pair.
class DpTable {
public:
    DpTable(int n_max, int k_max, double f_bell)
        : n_max_(n_max), k_max_(k_max), f_bell_(f_bell),
          cells_(static_cast<size_t>(n_max - 1) * k_max) {
        detail::require(n_max >= 2 && n_max <= kMaxQubits, "DpTable: n_max out of range");
        detail::require(k_max >= n_max - 1, "DpTable: k_max must be at least n_max - 1");
        detail::require(f_bell >= 0.0 && f_bell <= 1.0, "DpTable: fidelity outside [0, 1]");
    }

    int n_max() const { return n_max_; }
    int k_max() const { return k_max_; }
    double f_bell() const { return f_bell_; }

    DpCell& cell(int n, int k) { return cells_[index(n, k)]; }
    const DpCell& cell(int n, int k) const { return cells_[index(n, k)]; }

    /// Highest-fidelity entry of a cell, or nullptr when the cell is empty.
    const DpEntry* best(int n, int k) const {
        const DpCell& c = cell(n, k);
        const DpEntry* top = nullptr;
        for (const DpEntry& e : c.entries)
            if (!top || e.fidelity > top->fidelity) top = &e;
        return top;
    }

    const DpEntry& best_final() const {
        const DpEntry* top = best(n_max_, k_max_);
        if (!top) throw std::logic_error("DpTable: empty final cell");
        return *top;
    }

private:
    size_t index(int n, int k) const {
        detail::require(n >= 2 && n <= n_max_ && k >= n - 1 && k <= k_max_, "DpTable: cell out of range");
        return static_cast<size_t>(n - 2) * k_max_ + (k - 1);
    }

    int n_max_;
    int k_max_;
    double f_bell_;
    std::vector<DpCell> cells_;
};

struct GridPoint {
    int n = 0;
    int k = 0;
    double best_fidelity = 0.0;
    double success_product = 1.0;
};

inline std::vector<GridPoint> grid_summary(const DpTable& table) {
    std::vector<GridPoint> out;
    for (int n = 2; n <= table.n_max(); ++n)
        for (int k = n - 1; k <= table.k_max(); ++k)
            if (const DpEntry* e = table.best(n, k))
                out.push_back({n, k, e->fidelity, e->success_product});
    return out;
}

namespace detail_opt {

inline bool states_equal(const GhzDiagState& a, const GhzDiagState& b, double tol = 1e-12) {
    for (size_t idx = 0; idx < a.coeffs.size(); ++idx)
        if (std::abs(a.coeffs[idx] - b.coeffs[idx]) > tol) return false;
    return true;
}

/// Buffer insertion of Algorithm 1, plus suppression of duplicate states
/// (buffer diversity is the whole point of b > 1). Keeps entries sorted by
/// descending fidelity; on overflow drops the lowest; incumbents win ties.
inline void offer(DpCell& cell, size_t buffer, DpEntry candidate) {
    auto& entries = cell.entries;
    if (entries.size() >= buffer && candidate.fidelity <= entries.back().fidelity) return;
    for (const DpEntry& e : entries)
        if (states_equal(e.state, candidate.state)) return;
    auto pos = entries.begin();
    while (pos != entries.end() && pos->fidelity >= candidate.fidelity) ++pos;
    entries.insert(pos, std::move(candidate));
    if (entries.size() > buffer) entries.pop_back();
}

inline DpEntry make_measure_entry(const DpEntry& main, const DpEntry& ancilla, const StabilizerIndex& s,
                                  MeasurementResult&& r) {
    DpEntry e;
    e.fidelity = r.post_state->fidelity();
    e.state = std::move(*r.post_state);
    e.success_product = main.success_product * ancilla.success_product * r.success_prob;
    e.protocol = make_measure(main.protocol, ancilla.protocol, s.mask, r.success_prob);
    return e;
}

inline DpEntry make_fuse_entry(const DpEntry& left, const DpEntry& right, int i, int j,
                               GhzDiagState&& state) {
    DpEntry e;
    e.fidelity = state.fidelity();
    e.state = std::move(state);
    e.success_product = left.success_product * right.success_product;
    e.protocol = make_fuse(left.protocol, right.protocol, i, j);
    return e;
}

inline DpEntry raw_pair_entry(double f_bell) {
    DpEntry e;
    e.protocol = make_leaf();
    e.state = isotropic_bell(f_bell);
    e.fidelity = f_bell;
    e.success_product = 1.0;
    return e;
}

} // namespace detail_opt

/// Base dynamic program: for every grid cell, tries every measurement and
/// fusion combination of already-stored entries in a fixed order and keeps
/// the b highest-fidelity distinct states. Deterministic.
inline DpTable base_dp(int n_max, int k_max, double f_bell, size_t buffer) {
    detail::require(buffer >= 1, "base_dp: buffer must be >= 1");
    DpTable table(n_max, k_max, f_bell);
    table.cell(2, 1).entries.push_back(detail_opt::raw_pair_entry(f_bell));

    for (int n = 2; n <= n_max; ++n) {
        const auto stabilizers = enumerate_stabilizers(n);
        for (int k = n - 1; k <= k_max; ++k) {
            if (n == 2 && k == 1) continue;
            DpCell& cell = table.cell(n, k);

            // Non-local measurements: stabilizer mask ascending, then the
            // ancilla pair count, then buffer indices.
            for (const StabilizerIndex& s : stabilizers) {
                const int w = weight(s);
                for (int kp = w - 1; kp <= k - n + 1; ++kp) {
                    const auto& mains = table.cell(n, k - kp).entries;
                    const auto& ancillas = table.cell(w, kp).entries;
                    for (const DpEntry& main : mains) {
                        for (const DpEntry& ancilla : ancillas) {
                            MeasurementResult r = measure_stabilizer(main.state, s, ancilla.state);
                            if (!r.post_state) continue; // impossible branch
                            detail_opt::offer(cell, buffer,
                                              detail_opt::make_measure_entry(main, ancilla, s, std::move(r)));
                        }
                    }
                }
            }

            // Fusions: n2, k2, i, j, then buffer indices. k2 ranges over the
            // feasible splits (both sides must keep k >= n - 1).
            for (int n2 = 2; n2 <= n - 1; ++n2) {
                const int n1 = n - n2 + 1;
                for (int k2 = n2 - 1; k2 <= k - n1 + 1; ++k2) {
                    const int k1 = k - k2;
                    const auto& lefts = table.cell(n1, k1).entries;
                    const auto& rights = table.cell(n2, k2).entries;
                    for (int i = 0; i < n1; ++i) {
                        for (int j = 0; j < n2; ++j) {
                            for (const DpEntry& left : lefts) {
                                for (const DpEntry& right : rights) {
                                    GhzDiagState fused = fuse(left.state, i, right.state, j);
                                    detail_opt::offer(cell, buffer,
                                                      detail_opt::make_fuse_entry(left, right, i, j,
                                                                                  std::move(fused)));
                                }
                            }
                        }
                    }
                }
            }

            if (cell.entries.empty()) throw std::logic_error("base_dp: empty feasible cell");
        }
    }
    return table;
}

struct RandomSearchConfig {
    size_t buffer = 1;
    double temperature = 1e-4;          // used by random_dp
    std::vector<double> temperatures;   // used by multi_run; empty = {temperature}
    uint64_t seed = 0;
    int runs = 1;

    std::vector<double> temperature_list() const {
        return temperatures.empty() ? std::vector<double>{temperature} : temperatures;
    }
};

struct RandomDpStats {
    uint64_t slots = 0;
    uint64_t proposals_worse = 0;           // candidate fidelity <= previous slot
    uint64_t accepted_worse = 0;
    uint64_t proposals_worse_millis = 0;    // fidelity drop of at least 1e-3
    uint64_t accepted_worse_millis = 0;
};

namespace detail_opt {

/// Per-cell sampling tables for the randomized program.
struct CellSchemes {
    // Measurement: stabilizers whose ancilla fits in the pair budget.
    std::vector<StabilizerIndex> stabilizers;
    std::vector<int> weights;
    // Fusion: flattened (n2, k2, i, j) tuples; every n2 contributes
    // (k - n + 2) * n1 * n2 of them.
    struct FusionGroup {
        int n2 = 0;
        uint64_t begin = 0; // cumulative offset
    };
    std::vector<FusionGroup> fusion_groups;
    uint64_t fusion_total = 0;
};

inline CellSchemes build_schemes(int n, int k, const std::vector<StabilizerIndex>& all_stabilizers,
                                 const std::vector<int>& all_weights) {
    CellSchemes s;
    const int k_budget = k - n + 1;
    for (size_t idx = 0; idx < all_stabilizers.size(); ++idx) {
        if (all_weights[idx] - 1 <= k_budget) {
            s.stabilizers.push_back(all_stabilizers[idx]);
            s.weights.push_back(all_weights[idx]);
        }
    }
    const uint64_t splits = static_cast<uint64_t>(k - n + 2);
    for (int n2 = 2; n2 <= n - 1; ++n2) {
        const int n1 = n - n2 + 1;
        s.fusion_groups.push_back({n2, s.fusion_total});
        s.fusion_total += splits * static_cast<uint64_t>(n1) * static_cast<uint64_t>(n2);
    }
    return s;
}

} // namespace detail_opt

/// Randomized dynamic program. Each cell's b slots are filled sequentially
/// with randomly drawn candidates; a candidate that does not beat the
/// previous slot is accepted with probability exp(dF / T), otherwise the
/// previous slot is copied. Fully deterministic given the seed.
inline DpTable random_dp(int n_max, int k_max, double f_bell, const RandomSearchConfig& cfg,
                         RandomDpStats* stats = nullptr) {
    detail::require(cfg.buffer >= 1, "random_dp: buffer must be >= 1");
    detail::require(cfg.temperature > 0.0, "random_dp: temperature must be > 0");
    DpTable table(n_max, k_max, f_bell);
    table.cell(2, 1).entries.push_back(detail_opt::raw_pair_entry(f_bell));
    SplitMix64 rng(cfg.seed);

    for (int n = 2; n <= n_max; ++n) {
        const auto stabilizers = enumerate_stabilizers(n);
        std::vector<int> weights(stabilizers.size());
        for (size_t idx = 0; idx < stabilizers.size(); ++idx) weights[idx] = weight(stabilizers[idx]);

        for (int k = n - 1; k <= k_max; ++k) {
            if (n == 2 && k == 1) continue;
            DpCell& cell = table.cell(n, k);
            cell.entries.reserve(cfg.buffer);
            const auto schemes = detail_opt::build_schemes(n, k, stabilizers, weights);
            const bool can_measure = !schemes.stabilizers.empty() && k - n + 1 >= 1;
            const bool can_fuse = schemes.fusion_total > 0;
            if (!can_measure && !can_fuse) throw std::logic_error("random_dp: empty feasible cell");

            for (size_t slot = 0; slot < cfg.buffer; ++slot) {
                const bool measure = can_measure && (!can_fuse || rng.next_double() < 0.5);
                DpEntry candidate;
                if (measure) {
                    const size_t pick = rng.next_below(schemes.stabilizers.size());
                    const StabilizerIndex& s = schemes.stabilizers[pick];
                    const int w = schemes.weights[pick];
                    const int kp = w - 1 + static_cast<int>(rng.next_below(k - n + 1 - (w - 1) + 1));
                    const auto& mains = table.cell(n, k - kp).entries;
                    const auto& ancillas = table.cell(w, kp).entries;
                    const DpEntry& main = mains[rng.next_below(mains.size())];
                    const DpEntry& ancilla = ancillas[rng.next_below(ancillas.size())];
                    MeasurementResult r = measure_stabilizer(main.state, s, ancilla.state);
                    if (!r.post_state) throw std::logic_error("random_dp: impossible measurement branch");
                    candidate = detail_opt::make_measure_entry(main, ancilla, s, std::move(r));
                } else {
                    uint64_t pick = rng.next_below(schemes.fusion_total);
                    size_t group = schemes.fusion_groups.size() - 1;
                    while (schemes.fusion_groups[group].begin > pick) --group;
                    pick -= schemes.fusion_groups[group].begin;
                    const int n2 = schemes.fusion_groups[group].n2;
                    const int n1 = n - n2 + 1;
                    const int j = static_cast<int>(pick % n2);
                    pick /= n2;
                    const int i = static_cast<int>(pick % n1);
                    pick /= n1;
                    const int k2 = n2 - 1 + static_cast<int>(pick);
                    const int k1 = k - k2;
                    const auto& lefts = table.cell(n1, k1).entries;
                    const auto& rights = table.cell(n2, k2).entries;
                    const DpEntry& left = lefts[rng.next_below(lefts.size())];
                    const DpEntry& right = rights[rng.next_below(rights.size())];
                    candidate = detail_opt::make_fuse_entry(left, right, i, j,
                                                            fuse(left.state, i, right.state, j));
                }

                bool accept = true;
                if (!cell.entries.empty()) {
                    const double previous = cell.entries.back().fidelity;
                    const double delta = candidate.fidelity - previous;
                    if (delta <= 0.0) {
                        if (stats) {
                            stats->proposals_worse++;
                            if (delta <= -1e-3) stats->proposals_worse_millis++;
                        }
                        accept = rng.next_double() < std::exp(delta / cfg.temperature);
                        if (stats && accept) {
                            stats->accepted_worse++;
                            if (delta <= -1e-3) stats->accepted_worse_millis++;
                        }
                    }
                }
                if (stats) stats->slots++;
                if (accept)
                    cell.entries.push_back(std::move(candidate));
                else
                    cell.entries.push_back(cell.entries.back());
            }
        }
    }
    return table;
}

struct RunLogEntry {
    int run = 0;
    int temp_index = 0;
    double temperature = 0.0;
    uint64_t seed = 0;
    double best_fidelity = 0.0;
    double success_product = 1.0;
};

struct MultiRunResult {
    DpEntry best;
    int best_run = 0;
    int best_temp_index = 0;
    std::vector<RunLogEntry> log;            // one row per (run, temperature)
    std::vector<GridPoint> grid;             // grid summary of the winning run
};

/// Repeats the randomized program cfg.runs times per temperature, with
/// per-job seeds derived from (cfg.seed, job index), and keeps the best
/// final entry. Jobs are independent; the reported winner does not depend
/// on the thread count.
inline MultiRunResult multi_run(int n_max, int k_max, double f_bell, const RandomSearchConfig& cfg,
                                int threads = 1) {
    detail::require(cfg.runs >= 1, "multi_run: runs must be >= 1");
    const std::vector<double> temps = cfg.temperature_list();
    const size_t n_jobs = static_cast<size_t>(cfg.runs) * temps.size();

    struct JobResult {
        DpEntry best;
        std::vector<GridPoint> grid;
    };
    std::vector<JobResult> results(n_jobs);

    auto run_job = [&](size_t job) {
        const int run = static_cast<int>(job / temps.size());
        const int ti = static_cast<int>(job % temps.size());
        RandomSearchConfig job_cfg = cfg;
        job_cfg.temperature = temps[ti];
        job_cfg.seed = SplitMix64::derive(cfg.seed, job);
        (void)run;
        DpTable table = random_dp(n_max, k_max, f_bell, job_cfg);
        results[job].best = table.best_final();
        results[job].grid = grid_summary(table);
    };

    int n_threads = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
    if (n_threads < 1) n_threads = 1;
    n_threads = static_cast<int>(std::min<size_t>(n_threads, n_jobs));
    if (n_threads == 1) {
        for (size_t job = 0; job < n_jobs; ++job) run_job(job);
    } else {
        std::vector<std::thread> pool;
        std::atomic<size_t> next{0};
        for (int t = 0; t < n_threads; ++t)
            pool.emplace_back([&] {
                for (size_t job = next.fetch_add(1); job < n_jobs; job = next.fetch_add(1)) run_job(job);
            });
        for (auto& th : pool) th.join();
    }

    MultiRunResult out;
    size_t best_job = 0;
    for (size_t job = 0; job < n_jobs; ++job) {
        const int run = static_cast<int>(job / temps.size());
        const int ti = static_cast<int>(job % temps.size());
        out.log.push_back({run, ti, temps[ti], SplitMix64::derive(cfg.seed, job),
                           results[job].best.fidelity, results[job].best.success_product});
        if (results[job].best.fidelity > results[best_job].best.fidelity) best_job = job;
    }
    out.best = results[best_job].best;
    out.best_run = static_cast<int>(best_job / temps.size());
    out.best_temp_index = static_cast<int>(best_job % temps.size());
    out.grid = std::move(results[best_job].grid);
    return out;
}

/// Geometrically spaced temperature ladder, inclusive of both endpoints.
inline std::vector<double> temperature_ladder(double t_min, double t_max, int count) {
    detail::require(count >= 1 && t_min > 0.0 && t_max >= t_min, "temperature_ladder: bad range");
    std::vector<double> out(count);
    if (count == 1) {
        out[0] = t_min;
        return out;
    }
    const double ratio = std::pow(t_max / t_min, 1.0 / (count - 1));
    double t = t_min;
    for (int idx = 0; idx < count; ++idx) {
        out[idx] = t;
        t *= ratio;
    }
    out[count - 1] = t_max;
    return out;
}

} // namespace ghzforge
