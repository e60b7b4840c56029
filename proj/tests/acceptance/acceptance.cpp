// Acceptance suite: one line per criterion, [PASS]/[FAIL], nonzero exit on
// any failure. Set GHZFORGE_ACCEPT_EXTENDED=1 to run the full (8,80) search
// in criterion 7 instead of the pre-registered (6,40) short form.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#include <ghzforge/baselines.hpp>
#include <ghzforge/monte_carlo.hpp>
#include <ghzforge/optimizer.hpp>
#include <ghzforge/oracle.hpp>

#include "../support/brute_force.hpp"
#include "../support/test_util.hpp"

using namespace ghzforge;
using clock_type = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double max_diff(const GhzDiagState& a, const GhzDiagState& b) {
    return testutil::max_coeff_diff(a, b);
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// 1. Fast-path fuse and measure match the statevector oracle on >= 1000
//    random GHZ-diagonal input pairs with at most 8 total qubits.
Outcome criterion_oracle_equivalence() {
    SplitMix64 rng(0xACCE01);
    double worst = 0.0;
    int fuse_checks = 0, measure_checks = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int nA = 2 + static_cast<int>(rng.next_below(5)); // 2..6
        const int nB = 2 + static_cast<int>(rng.next_below(8 - nA - 1));
        auto a = testutil::random_state(nA, rng);
        auto b = testutil::random_state(nB, rng);
        const int i = static_cast<int>(rng.next_below(nA));
        const int j = static_cast<int>(rng.next_below(nB));
        worst = std::max(worst, max_diff(fuse(a, i, b, j), oracle::oracle_fuse(a, i, b, j)));
        ++fuse_checks;

        // Random stabilizer whose ancilla keeps the oracle within 8 qubits.
        std::vector<StabilizerIndex> eligible;
        for (const auto& s : enumerate_stabilizers(nA))
            if (nA + weight(s) <= 8) eligible.push_back(s);
        if (eligible.empty()) continue;
        const auto& s = eligible[rng.next_below(eligible.size())];
        auto ancilla = testutil::random_state(weight(s), rng);
        auto fast = measure_stabilizer(a, s, ancilla);
        auto slow = oracle::oracle_measure(a, s, ancilla);
        worst = std::max(worst, std::abs(fast.success_prob - slow.success_prob));
        if (fast.post_state && slow.post_state)
            worst = std::max(worst, max_diff(*fast.post_state, *slow.post_state));
        ++measure_checks;
    }
    Outcome out;
    out.pass = worst < 1e-10 && fuse_checks >= 1000 && measure_checks >= 900;
    out.detail = std::to_string(fuse_checks) + " fusions + " + std::to_string(measure_checks) +
                 " measurements, max deviation " + fmt(worst);
    return out;
}

// 2. basis_ket reproduces all eight rows of the 3-qubit GHZ basis table
//    exactly (amplitudes +-1/sqrt 2).
Outcome criterion_table_reproduction() {
    const double r = std::sqrt(0.5);
    struct Row {
        uint32_t code, lo, hi;
        double hi_sign;
    };
    const std::vector<Row> rows = {
        {0b000, 0b000, 0b111, +1}, {0b100, 0b001, 0b110, +1}, {0b010, 0b011, 0b100, +1},
        {0b110, 0b010, 0b101, +1}, {0b001, 0b000, 0b111, -1}, {0b101, 0b001, 0b110, -1},
        {0b011, 0b011, 0b100, -1}, {0b111, 0b010, 0b101, -1},
    };
    int exact_rows = 0;
    for (const Row& row : rows) {
        auto ket = oracle::basis_ket(BasisLabel(3, row.code));
        bool good = true;
        for (uint32_t idx = 0; idx < 8; ++idx) {
            double expected = idx == row.lo ? r : idx == row.hi ? row.hi_sign * r : 0.0;
            if (ket.amplitudes[idx] != oracle::cdouble(expected, 0.0)) good = false;
        }
        exact_rows += good;
    }
    return {exact_rows == 8, std::to_string(exact_rows) + "/8 rows bit-exact"};
}

// 3. 100 optimizer protocols evaluated at F_bell = 1 give fidelity 1 and
//    success probability 1, exactly.
Outcome criterion_perfect_inputs() {
    RandomSearchConfig cfg;
    cfg.buffer = 40;
    cfg.temperature = 1e-4;
    cfg.seed = 0xACCE03;
    DpTable table = random_dp(5, 8, 0.9, cfg);
    int checked = 0;
    bool all_exact = true;
    for (int n = 2; n <= 5 && checked < 100; ++n) {
        for (int k = n - 1; k <= 8 && checked < 100; ++k) {
            for (const DpEntry& e : table.cell(n, k).entries) {
                if (checked >= 100) break;
                Protocol p;
                p.root = e.protocol;
                auto r = evaluate(p, 1.0);
                if (r.state.fidelity() != 1.0) all_exact = false;
                for (double sp : r.node_success_probs)
                    if (sp != 1.0) all_exact = false;
                ++checked;
            }
        }
    }
    return {all_exact && checked == 100,
            std::to_string(checked) + " protocols, fidelity and success probabilities exactly 1"};
}

// 4. base_dp with a full-width buffer equals an independent brute-force
//    enumeration of the whole search space at (2,2) and (3,3).
Outcome criterion_exhaustive() {
    testutil::BruteForce brute(0.9);
    const double b22 = brute.best_fidelity(2, 2);
    const double b33 = brute.best_fidelity(3, 3);
    const double d22 = base_dp(2, 2, 0.9, size_t{1} << 20).best_final().fidelity;
    const double d33 = base_dp(3, 3, 0.9, size_t{1} << 20).best_final().fidelity;
    bool pass = std::abs(b22 - d22) <= 1e-12 && std::abs(b33 - d33) <= 1e-12;
    return {pass, "(2,2): dp " + fmt(d22) + " vs brute " + fmt(b22) + " over " +
                      std::to_string(brute.cell(2, 2).size()) + " protocols; (3,3): dp " + fmt(d33) +
                      " vs brute " + fmt(b33) + " over " + std::to_string(brute.cell(3, 3).size()) +
                      " protocols"};
}

// 5. Best-of-44-runs randomized program (b=200, 18 temperatures) at (4,42)
//    reaches at least the base program's fidelity with b=3.
Outcome criterion_random_beats_base() {
    const double base = base_dp(4, 42, 0.9, 3).best_final().fidelity;
    RandomSearchConfig cfg;
    cfg.buffer = 200;
    cfg.runs = 44;
    cfg.temperatures = temperature_ladder(1e-5, 9e-4, 18);
    cfg.seed = 0xACCE05;
    auto result = multi_run(4, 42, 0.9, cfg);
    return {result.best.fidelity >= base,
            "random " + fmt(result.best.fidelity) + " vs base(b=3) " + fmt(base)};
}

// 6. The best found (4,22) and (4,42) protocols match or beat the
//    reconstructed baselines at F_bell in {0.85, 0.9, 0.95}. Baseline values
//    are reconstruction-dependent (see README).
Outcome criterion_beats_baselines() {
    Outcome out;
    out.pass = true;
    for (double f : {0.85, 0.9, 0.95}) {
        RandomSearchConfig cfg;
        cfg.buffer = 200;
        cfg.runs = 8;
        cfg.temperatures = temperature_ladder(1e-5, 9e-4, 6);
        cfg.seed = 0xACCE06;
        const double found22 = multi_run(4, 22, f, cfg).best.fidelity;
        const double found42 = multi_run(4, 42, f, cfg).best.fidelity;
        const double exp_f = evaluate(expedient(), f).state.fidelity();
        const double str_f = evaluate(stringent(), f).state.fidelity();
        if (found22 < exp_f || found42 < str_f) out.pass = false;
        out.detail += "F=" + fmt(f) + ": (4,22) " + fmt(found22) + " vs expedient " + fmt(exp_f) +
                      ", (4,42) " + fmt(found42) + " vs stringent " + fmt(str_f) + "; ";
    }
    return out;
}

// 7. Large-instance target. Extended: (8,80) reaches F >= 0.9995 with
//    full-scale settings. Short form (default): ten repetitions of a
//    pre-registered (6,40) search all reach F >= 0.995 with best-of-10
//    spread below 5e-4.
Outcome criterion_large_instance(bool extended) {
    if (extended) {
        RandomSearchConfig cfg;
        cfg.buffer = 200;
        cfg.runs = 44;
        cfg.temperatures = temperature_ladder(1e-5, 9e-4, 18);
        cfg.seed = 0xACCE07;
        auto result = multi_run(8, 80, 0.9, cfg);
        return {result.best.fidelity >= 0.9995,
                "(8,80) best " + fmt(result.best.fidelity) + " target 0.9995"};
    }
    // Pre-registered pilot configuration: one wide-buffer run per
    // repetition (b=20000, T=1e-5). Pilot values clustered in
    // [0.99691, 0.99719] with spread 2.7e-4.
    double lo = 1.0, hi = 0.0;
    for (int rep = 0; rep < 10; ++rep) {
        RandomSearchConfig cfg;
        cfg.buffer = 20000;
        cfg.temperature = 1e-5;
        cfg.seed = 0x640ULL * 1000 + rep;
        DpTable table = random_dp(6, 40, 0.9, cfg);
        const double f = table.best_final().fidelity;
        lo = std::min(lo, f);
        hi = std::max(hi, f);
    }
    bool pass = lo >= 0.995 && (hi - lo) < 5e-4;
    return {pass, "(6,40) best-of-10 in [" + fmt(lo) + ", " + fmt(hi) + "], spread " + fmt(hi - lo) +
                      " (need min >= 0.995, spread < 5e-4)"};
}

// 8. Fusing n-1 isotropic 0.9 pairs degrades fidelity strictly and roughly
//    exponentially in n (log-linear fit R^2 >= 0.99); oracle cross-check for
//    n <= 6.
Outcome criterion_fusion_degradation() {
    std::vector<double> fidelities;
    GhzDiagState chain = isotropic_bell(0.9);
    GhzDiagState oracle_chain = chain;
    double worst_oracle_diff = 0.0;
    for (int n = 3; n <= 8; ++n) {
        chain = fuse(chain, chain.n - 1, isotropic_bell(0.9), 0);
        if (n <= 6) {
            oracle_chain = oracle::oracle_fuse(oracle_chain, oracle_chain.n - 1, isotropic_bell(0.9), 0);
            worst_oracle_diff = std::max(worst_oracle_diff, max_diff(chain, oracle_chain));
        }
        fidelities.push_back(chain.fidelity());
    }
    bool decreasing = true;
    double previous = 0.9;
    for (double f : fidelities) {
        if (f >= previous) decreasing = false;
        previous = f;
    }
    // Least-squares fit of log F against n.
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    const int m = static_cast<int>(fidelities.size());
    for (int idx = 0; idx < m; ++idx) {
        double x = idx + 3, y = std::log(fidelities[idx]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
    }
    double cov = sxy - sx * sy / m;
    double vx = sxx - sx * sx / m;
    double vy = syy - sy * sy / m;
    double r2 = cov * cov / (vx * vy);
    bool pass = decreasing && r2 >= 0.99 && worst_oracle_diff < 1e-10;
    return {pass, "F(3..8) = " + fmt(fidelities.front()) + " .. " + fmt(fidelities.back()) +
                      ", log-fit R^2 " + fmt(r2) + ", oracle diff " + fmt(worst_oracle_diff)};
}

// 9. Monte Carlo sanity: deterministic schedule at F=1; correct mean
//    ordering between F=0.9 and F=0.99 at 3 sigma with 100000 shots.
Outcome criterion_monte_carlo() {
    Protocol p = stringent();
    auto perfect = monte_carlo(p, 1.0, 100000, 0xACCE09);
    bool deterministic = perfect.stderr_steps == 0.0 &&
                         perfect.mean_steps == static_cast<double>(perfect.schedule_length) &&
                         perfect.p99 == perfect.schedule_length;
    auto low = monte_carlo(p, 0.9, 100000, 0xACCE09);
    auto high = monte_carlo(p, 0.99, 100000, 0xACCE09);
    double sigma = std::sqrt(low.stderr_steps * low.stderr_steps + high.stderr_steps * high.stderr_steps);
    bool ordered = low.mean_steps - high.mean_steps > 3.0 * sigma;
    return {deterministic && ordered,
            "schedule " + std::to_string(perfect.schedule_length) + " exact at F=1; mean(0.9) " +
                fmt(low.mean_steps) + " vs mean(0.99) " + fmt(high.mean_steps) + " (" +
                fmt((low.mean_steps - high.mean_steps) / (sigma > 0 ? sigma : 1.0)) + " sigma)"};
}

} // namespace

int main() {
    const bool extended = [] {
        const char* env = std::getenv("GHZFORGE_ACCEPT_EXTENDED");
        return env != nullptr && std::strcmp(env, "0") != 0;
    }();

    struct Criterion {
        const char* name;
        double budget_s;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria = {
        {"oracle equivalence of fuse and measure", 300, criterion_oracle_equivalence},
        {"GHZ basis table reproduction", 1, criterion_table_reproduction},
        {"perfect-input identities", 60, criterion_perfect_inputs},
        {"small-instance exhaustive check", 120, criterion_exhaustive},
        {"randomized program beats base program", 7200, criterion_random_beats_base},
        {"found protocols beat reconstructed baselines", 7200, criterion_beats_baselines},
        {"large-instance fidelity target", extended ? 86400.0 : 1800.0,
         [&] { return criterion_large_instance(extended); }},
        {"fusion chain degradation", 60, criterion_fusion_degradation},
        {"Monte Carlo timing sanity", 300, criterion_monte_carlo},
    };

    int failures = 0;
    for (size_t idx = 0; idx < criteria.size(); ++idx) {
        auto start = clock_type::now();
        Outcome outcome;
        try {
            outcome = criteria[idx].run();
        } catch (const std::exception& e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        double seconds = std::chrono::duration<double>(clock_type::now() - start).count();
        if (seconds > criteria[idx].budget_s) {
            outcome.pass = false;
            outcome.detail += " [exceeded runtime budget]";
        }
        std::printf("[%s] %zu. %s — %s (%.1fs)\n", outcome.pass ? "PASS" : "FAIL", idx + 1,
                    criteria[idx].name, outcome.detail.c_str(), seconds);
        std::fflush(stdout);
        failures += !outcome.pass;
    }
    if (failures) std::printf("%d criterion(s) failed\n", failures);
    return failures;
}
