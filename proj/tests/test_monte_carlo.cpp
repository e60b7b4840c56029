#include <catch_amalgamated.hpp>

#include <ghzforge/baselines.hpp>
#include <ghzforge/monte_carlo.hpp>

using namespace ghzforge;

namespace {

Protocol zz_protocol() {
    Protocol p;
    p.root = make_measure(make_leaf(), make_leaf(), 0b10);
    return p;
}

} // namespace

TEST_CASE("perfect pairs make every shot deterministic") {
    for (const Protocol& p : {expedient(), zz_protocol()}) {
        auto report = monte_carlo(p, 1.0, 2000, 42);
        REQUIRE(report.stderr_steps == 0.0);
        REQUIRE(report.mean_steps == static_cast<double>(report.schedule_length));
        REQUIRE(report.p50 == report.schedule_length);
        REQUIRE(report.p99 == report.schedule_length);
        for (double r : report.node_retry_means) REQUIRE(r == 0.0);
    }
}

TEST_CASE("schedule length counts party-parallel rounds") {
    SECTION("a lone pair takes one step") {
        Protocol p;
        p.root = make_leaf();
        REQUIRE(monte_carlo(p, 1.0, 1, 0).schedule_length == 1);
    }
    SECTION("disjoint leaves fire in the same step") {
        // Chain of three pairs: leaves (0,1), (1,2), (2,3). The outer two are
        // disjoint and share step 1; the middle waits for step 2.
        Protocol p;
        p.root = make_fuse(make_fuse(make_leaf(), make_leaf(), 1, 0), make_leaf(), 2, 0);
        REQUIRE(monte_carlo(p, 1.0, 1, 0).schedule_length == 2);
    }
    SECTION("overlapping leaves serialize") {
        // Main pair and ZZ ancilla pair live on the same two parties.
        REQUIRE(monte_carlo(zz_protocol(), 1.0, 1, 0).schedule_length == 2);
    }
}

TEST_CASE("lower fidelity means more retries and longer runs") {
    auto p = stringent();
    auto low = monte_carlo(p, 0.9, 20000, 7);
    auto high = monte_carlo(p, 0.99, 20000, 7);
    REQUIRE(low.mean_steps >= static_cast<double>(low.schedule_length));
    // 3-sigma separation.
    double gap = low.mean_steps - high.mean_steps;
    double sigma = std::sqrt(low.stderr_steps * low.stderr_steps + high.stderr_steps * high.stderr_steps);
    REQUIRE(gap > 3.0 * sigma);
}

TEST_CASE("mean steps are non-increasing in fidelity") {
    auto p = expedient();
    double previous = std::numeric_limits<double>::infinity();
    for (double f : {0.9, 0.95, 0.99, 1.0}) {
        auto report = monte_carlo(p, f, 20000, 11);
        REQUIRE(report.mean_steps < previous + 3.0 * report.stderr_steps + 1e-12);
        previous = report.mean_steps;
    }
}

TEST_CASE("shot streams do not depend on threading") {
    auto p = expedient();
    auto seq = monte_carlo(p, 0.92, 5000, 13, 1);
    auto par = monte_carlo(p, 0.92, 5000, 13, 4);
    REQUIRE(seq.mean_steps == par.mean_steps);
    REQUIRE(seq.stderr_steps == par.stderr_steps);
    REQUIRE(seq.p90 == par.p90);
    REQUIRE(seq.node_retry_means == par.node_retry_means);
}

TEST_CASE("doubling shots moves the mean by at most a few stderr") {
    auto p = expedient();
    int within = 0;
    const int trials = 20;
    for (int t = 0; t < trials; ++t) {
        auto a = monte_carlo(p, 0.93, 4000, 1000 + t);
        auto b = monte_carlo(p, 0.93, 8000, 5000 + t);
        double sigma = std::sqrt(a.stderr_steps * a.stderr_steps + b.stderr_steps * b.stderr_steps);
        if (std::abs(a.mean_steps - b.mean_steps) < 3.0 * sigma) ++within;
    }
    REQUIRE(within >= trials - 1);
}

TEST_CASE("retry semantics match the analytic expectation") {
    SECTION("one measurement, serial parties: mean = 2/p") {
        auto p = zz_protocol();
        auto eval = evaluate(p, 0.9);
        const double success = eval.node_success_probs[0];
        auto report = monte_carlo(p, 0.9, 200000, 17);
        const double expected = 2.0 / success;
        REQUIRE(report.mean_steps == Catch::Approx(expected).margin(4.0 * report.stderr_steps));
        // Mean retries of the single node: (1 - p) / p.
        REQUIRE(report.node_retry_means[0] ==
                Catch::Approx((1.0 - success) / success).margin(0.02));
    }
    SECTION("nested measurement: mean = (2/p1 + 1)/p2") {
        // Outer XX check on a ZZ-distilled pair; every leaf shares the same
        // two parties, so each outer attempt costs (inner time) + 1 steps.
        Protocol p;
        p.root = make_measure(make_measure(make_leaf(), make_leaf(), 0b10), make_leaf(), 0b01);
        auto eval = evaluate(p, 0.9);
        REQUIRE(eval.node_success_probs.size() == 2);
        const double p_outer = eval.node_success_probs[0];
        const double p_inner = eval.node_success_probs[1];
        auto report = monte_carlo(p, 0.9, 200000, 19);
        const double expected = (2.0 / p_inner + 1.0) / p_outer;
        REQUIRE(report.mean_steps == Catch::Approx(expected).margin(4.0 * report.stderr_steps));
    }
}

TEST_CASE("single shot reports give degenerate quantiles") {
    auto report = monte_carlo(zz_protocol(), 0.9, 1, 3);
    REQUIRE(report.p50 == report.p90);
    REQUIRE(report.p90 == report.p99);
    REQUIRE(report.mean_steps == static_cast<double>(report.p50));
    REQUIRE(report.stderr_steps == 0.0);
}
