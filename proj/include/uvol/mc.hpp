#pragma once

#include "uvol/market.hpp"
#include "uvol/payoff.hpp"
#include "uvol/surface.hpp"

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace uvol {

// Volatility controls defining the simulated priors. Values stay inside
// [sigma_low, sigma_high]; Constant and Deterministic are deterministic in
// time, Feedback reads the worst-case field of a solved surface at the
// current state only, so every control is adapted by construction.
struct ConstantControl {
    double sigma;
};

// Right-continuous step function: sigma(t) = sigmas[k] on [times[k], times[k+1]).
struct DeterministicControl {
    std::vector<double> times;   // ascending, times[0] == 0
    std::vector<double> sigmas;  // same length as times
};

struct FeedbackControl {
    const Surface* surface;
};

using VolControl = std::variant<ConstantControl, DeterministicControl, FeedbackControl>;

std::string describe(const VolControl& c);
void validate_control(const VolControl& c, const MarketParams& p);
double control_sigma(const VolControl& c, double t, double s);

// Simulated paths, time-major: row k holds all paths at step k.
struct PathBatch {
    int n_paths = 0;
    int n_steps = 0;
    std::uint64_t seed = 0;
    double dt = 0.0;

    std::vector<double> stock;         // (n_steps+1) x n_paths
    std::vector<double> qv;            // (n_steps+1) x n_paths, accumulated <B>
    std::vector<double> control_used;  // n_steps x n_paths, sigma applied

    double S(int step, int path) const {
        return stock[static_cast<std::size_t>(step) * n_paths + path];
    }
    double qv_at(int step, int path) const {
        return qv[static_cast<std::size_t>(step) * n_paths + path];
    }
    double sigma_used(int step, int path) const {
        return control_used[static_cast<std::size_t>(step) * n_paths + path];
    }
};

struct McEstimate {
    double value = 0.0;
    double std_error = 0.0;
    int n_paths = 0;
    std::string control;
    int maximizer_index = -1;  // set by estimate_sup
};

struct QvReport {
    double min_rate = 0.0;       // min per-step qv increment / dt
    double max_rate = 0.0;
    double qv_total_min = 0.0;   // range of <B>_T across paths
    double qv_total_max = 0.0;
    bool within_bounds = false;
};

// Exact log-Euler scheme S_{k+1} = S_k exp((r - sigma^2/2) dt + sigma sqrt(dt) Z),
// quadratic variation accumulated analytically as sum sigma^2 dt.
PathBatch simulate_paths(const MarketParams& params, const VolControl& control,
                         int n_paths, int n_steps, std::uint64_t seed);

// Discounted mean payoff under one prior; streaming (paths are not stored),
// pairwise-summed, deterministic for fixed (seed, shape, control).
McEstimate estimate_claim(const MarketParams& params, const Payoff& payoff,
                          const VolControl& control, int n_paths, int n_steps,
                          std::uint64_t seed);

// Max over a finite control family: a lower bound on the G-expectation up to
// Monte Carlo error.
McEstimate estimate_sup(const MarketParams& params, const Payoff& payoff,
                        const std::vector<VolControl>& family, int n_paths,
                        int n_steps, std::uint64_t seed);

QvReport qv_bounds_check(const PathBatch& batch, const MarketParams& params);

// Pairwise (cascade) sum, used by all estimators.
double pairwise_sum(const double* data, std::size_t n);

// Worker threads used by estimate_claim (counter-based streams keep results
// independent of the partitioning). Defaults to 1; the CLI seeds this from
// UVOL_THREADS.
void set_thread_count(int n);
int thread_count();

} // namespace uvol
