#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "uvol/bsb.hpp"
#include "uvol/closed_form.hpp"
#include "uvol/mc.hpp"

#include <cmath>
#include <numeric>
#include <vector>

using namespace uvol;

namespace {
const MarketParams kP{0.05, 0.1, 0.3, 100.0, 1.0};
} // namespace

TEST_CASE("discounted stock is a martingale under each prior") {
    for (VolControl c : std::vector<VolControl>{
             ConstantControl{0.1}, ConstantControl{0.3},
             DeterministicControl{{0.0, 0.5}, {0.1, 0.3}}}) {
        McEstimate e = estimate_claim(kP, Payoff::forward(0.0), c, 60000, 64, 7);
        CHECK(std::abs(e.value - 100.0) <= 3.0 * e.std_error);
    }
}

TEST_CASE("quadratic variation accumulates exactly") {
    PathBatch b = simulate_paths(kP, DeterministicControl{{0.0, 0.5}, {0.1, 0.3}},
                                 100, 64, 3);
    const double expect = 0.5 * 0.01 + 0.5 * 0.09;
    for (int i = 0; i < b.n_paths; ++i)
        CHECK(b.qv_at(64, i) == doctest::Approx(expect).epsilon(1e-13));
    QvReport r = qv_bounds_check(b, kP);
    CHECK(r.within_bounds);
    CHECK(r.min_rate == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(r.max_rate == doctest::Approx(0.09).epsilon(1e-12));

    // a control outside the band is rejected before simulation
    CHECK_THROWS_AS(
        simulate_paths(kP, ConstantControl{0.4}, 10, 8, 1),
        std::invalid_argument);
}

TEST_CASE("constant-volatility estimates agree with the closed form") {
    for (double sig : {0.1, 0.2, 0.3}) {
        McEstimate e = estimate_claim(kP, Payoff::call(100),
                                      ConstantControl{sig}, 80000, 64, 11);
        const double bs = bs_call(100, 100, 0.05, sig, 1.0).price;
        CHECK(std::abs(e.value - bs) <= 3.0 * e.std_error);
    }
}

TEST_CASE("sup over constants picks the right endpoint") {
    std::vector<VolControl> family{ConstantControl{0.1}, ConstantControl{0.2},
                                   ConstantControl{0.3}};
    // convex claim: maximized at sigma_high
    McEstimate up = estimate_sup(kP, Payoff::call(100), family, 20000, 64, 13);
    CHECK(up.maximizer_index == 2);
    // concave claim (negated call, internal use): maximized at sigma_low
    McEstimate lo = estimate_sup(kP, Payoff::call(100).negated(), family,
                                 20000, 64, 13);
    CHECK(lo.maximizer_index == 0);
    CHECK_THROWS_AS(estimate_sup(kP, Payoff::call(100), {}, 100, 8, 1),
                    std::invalid_argument);
}

TEST_CASE("estimates are deterministic in the seed and batch-shape") {
    McEstimate a = estimate_claim(kP, Payoff::call(100), ConstantControl{0.2},
                                  30000, 32, 99);
    McEstimate b = estimate_claim(kP, Payoff::call(100), ConstantControl{0.2},
                                  30000, 32, 99);
    CHECK(a.value == b.value);
    CHECK(a.std_error == b.std_error);
    McEstimate c = estimate_claim(kP, Payoff::call(100), ConstantControl{0.2},
                                  30000, 32, 100);
    CHECK(a.value != c.value);

    // worker partitioning does not change the result
    set_thread_count(2);
    McEstimate d = estimate_claim(kP, Payoff::call(100), ConstantControl{0.2},
                                  30000, 32, 99);
    set_thread_count(1);
    CHECK(d.value == a.value);
}

TEST_CASE("feedback control reduces to the constant control on a call") {
    Surface s = solve_bsb(kP, Payoff::call(100), GridSpec{201, 100, 5.0}, {});
    PathBatch fb = simulate_paths(kP, FeedbackControl{&s}, 200, 64, 21);
    PathBatch ct = simulate_paths(kP, ConstantControl{0.3}, 200, 64, 21);
    // a convex payoff's worst case is sigma_high everywhere the paths reach
    int same = 0;
    for (int k = 0; k < fb.n_steps; ++k)
        for (int i = 0; i < fb.n_paths; ++i)
            same += fb.sigma_used(k, i) == 0.3;
    CHECK(same == fb.n_steps * fb.n_paths);
    for (int i = 0; i < fb.n_paths; ++i)
        CHECK(fb.S(64, i) == ct.S(64, i));
}

TEST_CASE("feedback control rejects a surface from other parameters") {
    MarketParams other(0.05, 0.15, 0.25, 100, 1);
    Surface s = solve_bsb(other, Payoff::call(100), GridSpec{201, 100, 5.0}, {});
    CHECK_THROWS_AS(simulate_paths(kP, FeedbackControl{&s}, 10, 8, 1),
                    std::invalid_argument);
}

TEST_CASE("deterministic control validation") {
    CHECK_THROWS_AS(
        simulate_paths(kP, DeterministicControl{{0.5}, {0.2}}, 10, 8, 1),
        std::invalid_argument);  // must start at t = 0
    CHECK_THROWS_AS(
        simulate_paths(kP, DeterministicControl{{0.0, 0.4, 0.2}, {0.2, 0.2, 0.2}},
                       10, 8, 1),
        std::invalid_argument);  // times must ascend
}

TEST_CASE("pairwise sum matches a long double reference") {
    std::vector<double> v(100001);
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = std::sin(0.001 * static_cast<double>(i)) * 1e6;
    long double acc = 0;
    for (double x : v) acc += x;
    CHECK(pairwise_sum(v.data(), v.size()) ==
          doctest::Approx(static_cast<double>(acc)).epsilon(1e-13));
}
