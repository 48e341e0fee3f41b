#pragma once

#include <cmath>
#include <stdexcept>

namespace uvol {

// Classical Black-Scholes closed forms, used as independent oracles for the
// degenerate band and for the convex/concave collapse of the price interval.
//
// The cumulative normal is evaluated through the complementary error
// function: N(x) = erfc(-x / sqrt(2)) / 2. libm's erfc is correctly rounded
// to within ~1 ulp, so |N(x) - exact| <= 1e-16 in double precision.
inline double norm_cdf(double x) {
    return 0.5 * std::erfc(-x * M_SQRT1_2);
}

inline double norm_pdf(double x) {
    static const double inv_sqrt_2pi = 0.3989422804014326779399461;
    return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

struct BsQuote {
    double price;
    double delta;
    double gamma;
    // inputs echoed
    double spot, strike, rate, sigma, tau;
};

inline BsQuote bs_call(double spot, double strike, double rate, double sigma,
                       double tau) {
    if (!(spot > 0) || !(strike > 0) || !(sigma > 0) || !(rate >= 0) || tau < 0)
        throw std::invalid_argument("bs_call: invalid inputs");
    BsQuote q{0, 0, 0, spot, strike, rate, sigma, tau};
    if (tau == 0.0) {
        q.price = std::max(spot - strike, 0.0);
        q.delta = spot > strike ? 1.0 : (spot < strike ? 0.0 : 0.5);
        q.gamma = 0.0;
        return q;
    }
    double sq = sigma * std::sqrt(tau);
    double d1 = (std::log(spot / strike) + (rate + 0.5 * sigma * sigma) * tau) / sq;
    double d2 = d1 - sq;
    double df = std::exp(-rate * tau);
    q.price = spot * norm_cdf(d1) - strike * df * norm_cdf(d2);
    q.delta = norm_cdf(d1);
    q.gamma = norm_pdf(d1) / (spot * sq);
    return q;
}

inline BsQuote bs_put(double spot, double strike, double rate, double sigma,
                      double tau) {
    BsQuote c = bs_call(spot, strike, rate, sigma, tau);
    BsQuote q = c;
    // put-call parity: put = call - spot + strike e^{-r tau}
    q.price = c.price - spot + strike * std::exp(-rate * tau);
    q.delta = c.delta - 1.0;
    q.gamma = c.gamma;
    if (tau == 0.0) q.price = std::max(strike - spot, 0.0);
    return q;
}

inline double forward_value(double spot, double strike, double rate, double tau) {
    return spot - strike * std::exp(-rate * tau);
}

} // namespace uvol
