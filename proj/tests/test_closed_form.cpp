#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "uvol/bsb.hpp"
#include "uvol/closed_form.hpp"
#include "uvol/payoff.hpp"
#include "uvol/rng.hpp"

#include <cmath>
#include <vector>

using namespace uvol;

namespace {

// Cox-Ross-Rubinstein tree, independent oracle for the closed form.
double crr_call(double spot, double strike, double rate, double sigma,
                double tau, int steps) {
    const double dt = tau / steps;
    const double u = std::exp(sigma * std::sqrt(dt));
    const double d = 1.0 / u;
    const double df = std::exp(-rate * dt);
    const double p = (std::exp(rate * dt) - d) / (u - d);
    std::vector<double> v(steps + 1);
    for (int i = 0; i <= steps; ++i) {
        const double s = spot * std::pow(u, steps - i) * std::pow(d, i);
        v[i] = std::max(s - strike, 0.0);
    }
    for (int k = steps; k > 0; --k)
        for (int i = 0; i < k; ++i) v[i] = df * (p * v[i] + (1 - p) * v[i + 1]);
    return v[0];
}

} // namespace

TEST_CASE("call price against a 10^4-step binomial tree") {
    // average consecutive step counts to cancel the tree's odd/even
    // oscillation around the strike
    const double tree = 0.5 * (crr_call(100, 100, 0.0, 0.2, 1.0, 10000) +
                               crr_call(100, 100, 0.0, 0.2, 1.0, 10001));
    const BsQuote q = bs_call(100, 100, 0.0, 0.2, 1.0);
    CHECK(q.price == doctest::Approx(tree).epsilon(1e-5));
    CHECK(q.price == doctest::Approx(7.965567).epsilon(1e-6));

    const double tree2 = 0.5 * (crr_call(100, 110, 0.05, 0.3, 2.0, 10000) +
                                crr_call(100, 110, 0.05, 0.3, 2.0, 10001));
    CHECK(bs_call(100, 110, 0.05, 0.3, 2.0).price ==
          doctest::Approx(tree2).epsilon(1e-5));
}

TEST_CASE("limits") {
    // tau -> 0 at the money
    CHECK(bs_call(100, 100, 0.05, 0.2, 1e-10).price ==
          doctest::Approx(0.0).epsilon(1e-4));
    CHECK(bs_call(100, 100, 0.05, 0.2, 0.0).price == 0.0);
    CHECK(bs_call(100, 100, 0.05, 0.2, 0.0).delta == 0.5);
    // deep in the money: forward limit
    CHECK(bs_call(1000, 100, 0.05, 0.2, 1.0).price ==
          doctest::Approx(forward_value(1000, 100, 0.05, 1.0)).epsilon(1e-12));
    // deep in the money put at zero rate
    CHECK(bs_put(10, 100, 0.0, 0.05, 1.0).price ==
          doctest::Approx(90.0).epsilon(1e-9));
    // vanishing vol, spot > strike, r = 0
    CHECK(bs_put(120, 100, 0.0, 1e-6, 1.0).price ==
          doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("put-call parity on random inputs") {
    for (int i = 0; i < 300; ++i) {
        auto u = [&](int k) {
            auto b = philox::generate(11, i, k);
            return uniform_open(b.v[0], b.v[1]);
        };
        const double spot = 50 + 150 * u(0);
        const double strike = 50 + 150 * u(1);
        const double rate = 0.1 * u(2);
        const double sigma = 0.05 + 0.5 * u(3);
        const double tau = 0.1 + 2.0 * u(4);
        const double call = bs_call(spot, strike, rate, sigma, tau).price;
        const double put = bs_put(spot, strike, rate, sigma, tau).price;
        CHECK(std::abs(put - call + spot - strike * std::exp(-rate * tau)) <=
              1e-12 * (1 + spot + strike));
    }
}

TEST_CASE("monotone in sigma and bracketing") {
    double prev = 0.0;
    for (double s : {0.10, 0.15, 0.20, 0.25, 0.30}) {
        const double p = bs_call(100, 100, 0.05, s, 1.0).price;
        CHECK(p > prev);
        prev = p;
    }
    const double lo = bs_call(100, 100, 0.05, 0.1, 1.0).price;
    const double hi = bs_call(100, 100, 0.05, 0.3, 1.0).price;
    for (double s : {0.12, 0.2, 0.28}) {
        const double p = bs_call(100, 100, 0.05, s, 1.0).price;
        CHECK(p > lo);
        CHECK(p < hi);
    }
}

TEST_CASE("delta and gamma ranges") {
    for (double x : {60.0, 90.0, 100.0, 130.0, 180.0}) {
        const BsQuote q = bs_call(x, 100, 0.03, 0.25, 0.7);
        CHECK(q.delta >= 0.0);
        CHECK(q.delta <= 1.0);
        CHECK(q.gamma >= 0.0);
    }
}

TEST_CASE("forward value") {
    CHECK(forward_value(100, 100, 0.0, 1.0) == 0.0);
    CHECK(forward_value(100, 100, 0.05, 1.0) ==
          doctest::Approx(4.877058).epsilon(1e-6));
    CHECK(forward_value(100, 0, 0.07, 3.0) == 100.0);
}

TEST_CASE("piecewise-linear decomposition pricing matches parity identities") {
    // put priced via decomposition equals closed-form put
    const double dec =
        bs_price_payoff(Payoff::put(100), 100, 0.05, 0.2, 1.0);
    CHECK(dec == doctest::Approx(bs_put(100, 100, 0.05, 0.2, 1.0).price)
                     .epsilon(1e-12));
    // bull spread equals call(90) - call(110)
    const double bsd =
        bs_price_payoff(Payoff::bull_spread(90, 110), 100, 0.05, 0.2, 1.0);
    CHECK(bsd == doctest::Approx(bs_call(100, 90, 0.05, 0.2, 1.0).price -
                                 bs_call(100, 110, 0.05, 0.2, 1.0).price)
                     .epsilon(1e-12));
    // forward equals its deterministic value
    CHECK(bs_price_payoff(Payoff::forward(100), 100, 0.05, 0.2, 1.0) ==
          doctest::Approx(forward_value(100, 100, 0.05, 1.0)).epsilon(1e-12));
}
