#pragma once

#include "uvol/market.hpp"
#include "uvol/payoff.hpp"
#include "uvol/surface.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace uvol {

struct SolverConfig {
    double policy_tol = 1e-10;   // relative value-update stop for policy iteration
    int max_policy_iters = 50;
    double tie_tol = 1e-12;      // curvature tie threshold (value units)
    int rannacher_steps = 2;     // leading implicit double-half-steps
    double consumption_tol = 1e-8;

    void validate() const {
        if (!(policy_tol > 0) || max_policy_iters < 1 || tie_tol < 0 ||
            rannacher_steps < 0 || !(consumption_tol > 0))
            throw std::invalid_argument("SolverConfig: invalid tolerances");
    }
};

struct SolverError : std::runtime_error {
    SolverError(const std::string& what, double residual_)
        : std::runtime_error(what), residual(residual_) {}
    double residual;
};

struct SolveDiagnostics {
    int total_policy_iters = 0;
    int max_policy_iters_step = 0;
    double final_residual = 0.0;
};

struct PriceInterval {
    double h_low = 0.0;
    double h_up = 0.0;
    struct Checkpoint {
        double sigma;
        double bs_price;
    };
    std::vector<Checkpoint> bs_mid;
    SolveDiagnostics diagnostics;
    GridSpec grid;
};

// Backward solve of  d_t u + r x d_x u + G(x^2 d_xx u) = r u,  u(T,.) = payoff,
// on the log-price grid. Crank-Nicolson with Rannacher start-up; each implicit
// stage is solved by policy iteration over the bang-bang control set.
Surface solve_bsb(const MarketParams& params, const Payoff& payoff,
                  const GridSpec& grid, const SolverConfig& cfg,
                  SolveDiagnostics* diag = nullptr);

// Upper price from the payoff solve, lower price from an independent solve
// with terminal data -payoff (the nonlinearity breaks the sign symmetry).
PriceInterval price_interval(const MarketParams& params, const Payoff& payoff,
                             const GridSpec& grid, const SolverConfig& cfg);

// Stock position and self-financing bond residual at (t, s).
struct HedgePosition {
    double phi;
    double bond_units;
};
HedgePosition extract_hedge(const Surface& surface, double t, double s);

// Consumption accrued over [t, t+dt] when the realized quadratic-variation
// rate is realized_qv_rate (must lie in [sigma_low^2, sigma_high^2]):
//   dC = ( -1/2 gamma(t,s) s^2 qv_rate + g(gamma(t,s)) s^2 ) dt >= 0.
double consumption_increment(const Surface& surface, double t, double s,
                             double realized_qv_rate, double dt,
                             const SolverConfig& cfg = {});

// Classical constant-sigma price of a piecewise-linear claim via its exact
// decomposition into cash + forward + calls.
double bs_price_payoff(const Payoff& payoff, double spot, double rate,
                       double sigma, double tau);

} // namespace uvol
