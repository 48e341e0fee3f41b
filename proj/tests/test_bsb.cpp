#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "uvol/bsb.hpp"
#include "uvol/closed_form.hpp"

#include <cmath>
#include <vector>

using namespace uvol;

namespace {

const GridSpec kFast{201, 100, 5.0};  // unit-test resolution

double center_price(const Surface& s) {
    return s.value(0, s.center_index());
}

} // namespace

TEST_CASE("terminal slice equals the payoff exactly") {
    MarketParams p(0.05, 0.1, 0.3, 100, 1);
    Payoff call = Payoff::call(100);
    Surface s = solve_bsb(p, call, kFast, {});
    const int nt = s.n_time();
    for (int j = 0; j < s.n_space(); ++j)
        CHECK(s.value(nt, j) == call(s.x_node(j)));
    // spot is on the center node
    CHECK(s.x_node(s.center_index()) == doctest::Approx(100.0).epsilon(1e-13));
}

TEST_CASE("degenerate band reproduces the classical price") {
    MarketParams p(0.05, 0.2, 0.2, 100, 1);
    Surface s = solve_bsb(p, Payoff::call(100), kFast, {});
    const double bs = bs_call(100, 100, 0.05, 0.2, 1.0).price;
    CHECK(center_price(s) == doctest::Approx(bs).epsilon(5e-4));
}

TEST_CASE("convex payoff collapses the interval to the band endpoints") {
    MarketParams p(0.05, 0.1, 0.3, 100, 1);
    PriceInterval pi = price_interval(p, Payoff::call(100), kFast, {});
    const double hi = bs_call(100, 100, 0.05, 0.3, 1.0).price;
    const double lo = bs_call(100, 100, 0.05, 0.1, 1.0).price;
    CHECK(pi.h_up == doctest::Approx(hi).epsilon(2e-3));
    CHECK(pi.h_low == doctest::Approx(lo).epsilon(2e-3));
}

TEST_CASE("interval sandwiches every constant-volatility price") {
    MarketParams p(0.05, 0.1, 0.3, 100, 1);
    PriceInterval pi = price_interval(p, Payoff::bull_spread(90, 110), kFast, {});
    CHECK(pi.h_low <= pi.h_up);
    REQUIRE(pi.bs_mid.size() >= 3);
    for (const auto& cp : pi.bs_mid) {
        CHECK(cp.bs_price >= pi.h_low - 1e-9);
        CHECK(cp.bs_price <= pi.h_up + 1e-9);
        CHECK(cp.bs_price ==
              doctest::Approx(bs_price_payoff(Payoff::bull_spread(90, 110), 100,
                                              0.05, cp.sigma, 1.0))
                  .epsilon(1e-12));
    }
}

TEST_CASE("linear payoff prices at the forward on both sides") {
    MarketParams p(0.05, 0.1, 0.3, 100, 1);
    PriceInterval pi = price_interval(p, Payoff::forward(100), kFast, {});
    const double fwd = forward_value(100, 100, 0.05, 1.0);
    CHECK(pi.h_up == doctest::Approx(fwd).epsilon(1e-4));
    CHECK(pi.h_low == doctest::Approx(fwd).epsilon(1e-4));
}

TEST_CASE("widening the band widens the interval") {
    Payoff bs = Payoff::bull_spread(90, 110);
    PriceInterval narrow = price_interval(
        MarketParams(0.05, 0.15, 0.25, 100, 1), bs, kFast, {});
    PriceInterval wide = price_interval(
        MarketParams(0.05, 0.10, 0.30, 100, 1), bs, kFast, {});
    CHECK(wide.h_up >= narrow.h_up - 1e-10);
    CHECK(wide.h_low <= narrow.h_low + 1e-10);
}

TEST_CASE("control field: convex payoff selects the upper volatility") {
    MarketParams p(0.05, 0.1, 0.3, 100, 1);
    Surface s = solve_bsb(p, Payoff::call(100), kFast, {});
    // interior band around the money, away from the terminal kink
    for (int i = 0; i <= s.n_time() / 2; ++i)
        for (int j = s.center_index() - 20; j <= s.center_index() + 20; ++j)
            CHECK(s.control(i, j) == 0.3);
}

TEST_CASE("control field: bull spread has a single switch per slice") {
    MarketParams p(0.05, 0.1, 0.3, 100, 1);
    Surface s = solve_bsb(p, Payoff::bull_spread(90, 110), kFast, {});
    for (int i = 0; i <= static_cast<int>(0.9 * s.n_time()); ++i) {
        int transitions = 0;
        double switch_x = 0.0;
        for (int j = 1; j < s.n_space(); ++j) {
            if (s.control(i, j) != s.control(i, j - 1)) {
                ++transitions;
                switch_x = s.x_node(j);
            }
        }
        CHECK(transitions == 1);
        CHECK(s.control(i, 0) == 0.3);                 // convex region below
        CHECK(s.control(i, s.n_space() - 1) == 0.1);   // concave region above
        CHECK(switch_x > 90.0);
        CHECK(switch_x < 110.0);
    }
}

TEST_CASE("extract_hedge matches the classical delta on a degenerate band") {
    MarketParams p(0.05, 0.2, 0.2, 100, 1);
    Surface s = solve_bsb(p, Payoff::call(100), kFast, {});
    for (double x : {85.0, 100.0, 120.0}) {
        HedgePosition h = extract_hedge(s, 0.0, x);
        const double bs_delta = bs_call(x, 100, 0.05, 0.2, 1.0).delta;
        CHECK(h.phi == doctest::Approx(bs_delta).epsilon(5e-3));
        // self-financing split: bond units priced at par here (t = 0)
        CHECK(h.phi * x + h.bond_units ==
              doctest::Approx(s.value_at(0.0, x)).epsilon(1e-12));
    }
}

TEST_CASE("consumption increments") {
    MarketParams p(0.05, 0.1, 0.3, 100, 1);
    Surface s = solve_bsb(p, Payoff::bull_spread(90, 110), kFast, {});
    const double dt = 1.0 / 256;
    // worst-case rate at the worst-case control: zero consumption
    for (double x : {85.0, 100.0, 120.0}) {
        const double sig = s.control_at(0.5, x);
        const double dc0 = consumption_increment(s, 0.5, x, sig * sig, dt);
        CHECK(dc0 >= 0.0);
        CHECK(dc0 <= 1e-6);
        // any admissible rate consumes a nonnegative amount
        for (double v : {0.1, 0.2, 0.3}) {
            CHECK(consumption_increment(s, 0.5, x, v * v, dt) >= 0.0);
        }
    }
    // rate outside the band is rejected
    CHECK_THROWS_AS(consumption_increment(s, 0.5, 100, 0.5, dt),
                    std::domain_error);
    CHECK_THROWS_AS(consumption_increment(s, 0.5, 100, 0.001, dt),
                    std::domain_error);
}

TEST_CASE("configuration validation") {
    MarketParams p(0.05, 0.1, 0.3, 100, 1);
    SolverConfig bad;
    bad.policy_tol = 0.0;
    CHECK_THROWS_AS(solve_bsb(p, Payoff::call(100), kFast, bad),
                    std::invalid_argument);
    GridSpec tiny{4, 100, 5.0};
    CHECK_THROWS_AS(solve_bsb(p, Payoff::call(100), tiny, {}),
                    std::invalid_argument);
}

TEST_CASE("diagnostics are populated") {
    MarketParams p(0.05, 0.1, 0.3, 100, 1);
    SolveDiagnostics d;
    solve_bsb(p, Payoff::bull_spread(90, 110), kFast, {}, &d);
    CHECK(d.total_policy_iters > 0);
    CHECK(d.max_policy_iters_step >= 1);
    CHECK(d.final_residual >= 0.0);
}
