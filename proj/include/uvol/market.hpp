#pragma once

#include <cmath>
#include <stdexcept>

namespace uvol {

// Market and uncertainty parameters: constant short rate r and a
// volatility band [sigma_low, sigma_high] for the risky asset.
struct MarketParams {
    double rate;        // continuously compounded, per year
    double sigma_low;   // lower volatility bound, > 0
    double sigma_high;  // upper volatility bound, >= sigma_low
    double spot;        // S_0 > 0
    double horizon;     // T > 0, years

    MarketParams(double rate_, double sigma_low_, double sigma_high_,
                 double spot_, double horizon_)
        : rate(rate_), sigma_low(sigma_low_), sigma_high(sigma_high_),
          spot(spot_), horizon(horizon_) {
        if (!(sigma_low > 0.0) || !(sigma_high >= sigma_low))
            throw std::invalid_argument("MarketParams: need 0 < sigma_low <= sigma_high");
        if (!(spot > 0.0)) throw std::invalid_argument("MarketParams: spot must be > 0");
        if (!(horizon > 0.0)) throw std::invalid_argument("MarketParams: horizon must be > 0");
        if (!(rate >= 0.0)) throw std::invalid_argument("MarketParams: rate must be >= 0");
    }

    bool degenerate_band() const { return sigma_low == sigma_high; }
};

// The sublinear generator of the volatility band:
//   g(y) = 1/2 sigma_high^2 y  for y >= 0,
//   g(y) = 1/2 sigma_low^2  y  for y <  0.
// Equivalently the support function of [sigma_low^2/2, sigma_high^2/2].
struct GFunction {
    double half_var_high;
    double half_var_low;

    explicit GFunction(const MarketParams& p)
        : half_var_high(0.5 * p.sigma_high * p.sigma_high),
          half_var_low(0.5 * p.sigma_low * p.sigma_low) {}

    GFunction(double sigma_low, double sigma_high)
        : half_var_high(0.5 * sigma_high * sigma_high),
          half_var_low(0.5 * sigma_low * sigma_low) {}

    double operator()(double y) const {
        return y >= 0.0 ? half_var_high * y : half_var_low * y;
    }

    double sigma_high() const { return std::sqrt(2.0 * half_var_high); }
    double sigma_low() const { return std::sqrt(2.0 * half_var_low); }

    // Volatility attaining sup_{v in [lo^2,hi^2]} v*gamma/2.
    // Ties (|gamma| <= tie_tol) resolve to sigma_high so the control field is
    // right-continuous in gamma and agrees with the convex-payoff limit.
    double worst_case_vol(double gamma, double tie_tol = 1e-12) const {
        if (gamma < -tie_tol) return sigma_low();
        return sigma_high();
    }
};

inline double g_eval(const GFunction& g, double y) { return g(y); }

// gamma_t^{-1} = e^{-r t}.
inline double discount(const MarketParams& p, double t) {
    if (t < 0.0 || t > p.horizon)
        throw std::out_of_range("discount: t outside [0, horizon]");
    return std::exp(-p.rate * t);
}

} // namespace uvol
