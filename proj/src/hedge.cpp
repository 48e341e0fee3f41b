#include "uvol/hedge.hpp"

#include "uvol/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace uvol {

namespace {

double quantile(std::vector<double> v, double q) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const double pos = q * (v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    const double w = pos - lo;
    return (1 - w) * v[lo] + w * v[hi];
}

} // namespace

HedgeReport simulate_hedge(const Surface& surface, const MarketParams& params,
                           const Payoff& payoff, const PathBatch& batch,
                           const SolverConfig& cfg) {
    const MarketParams& sp = surface.params();
    if (sp.rate != params.rate || sp.sigma_low != params.sigma_low ||
        sp.sigma_high != params.sigma_high || sp.spot != params.spot ||
        sp.horizon != params.horizon)
        throw std::invalid_argument(
            "simulate_hedge: surface solved under different parameters");
    if (batch.n_paths < 1)
        throw std::invalid_argument("simulate_hedge: empty batch");

    const int np = batch.n_paths;
    const int ns = batch.n_steps;
    const double dt = batch.dt;
    const double r = params.rate;
    const double x0 = params.spot;
    const double u0 = surface.value_at(0.0, x0);

    HedgeReport rep;
    rep.n_paths = np;
    rep.initial_capital = u0;
    rep.terminal_shortfall_max = -std::numeric_limits<double>::infinity();
    rep.consumption_min_increment = std::numeric_limits<double>::infinity();
    rep.min_wealth = std::numeric_limits<double>::infinity();

    std::vector<double> shortfalls(np);
    double consumption_sum = 0.0;

    for (int i = 0; i < np; ++i) {
        double X = u0;
        double C = 0.0;
        for (int k = 0; k < ns; ++k) {
            const double t = k * dt;
            const double S = batch.S(k, i);
            const double S_next = batch.S(k + 1, i);
            const double phi = surface.delta_at(t, S);
            const double sig = batch.sigma_used(k, i);
            const double dC =
                consumption_increment(surface, t, S, sig * sig, dt, cfg);
            X += phi * (S_next - S) + (X - phi * S) * r * dt - dC;
            C += dC;
            rep.consumption_min_increment =
                std::min(rep.consumption_min_increment, dC);
            rep.min_wealth = std::min(rep.min_wealth, X);
        }
        const double shortfall = payoff(batch.S(ns, i)) - X;
        shortfalls[i] = shortfall;
        rep.terminal_shortfall_max =
            std::max(rep.terminal_shortfall_max, shortfall);
        consumption_sum += C;
    }

    rep.consumption_total_mean = consumption_sum / np;
    rep.shortfall_q50 = quantile(shortfalls, 0.50);
    rep.shortfall_q90 = quantile(shortfalls, 0.90);
    rep.shortfall_q99 = quantile(shortfalls, 0.99);
    return rep;
}

ArbitrageDemo demo_arbitrage_outside_interval(
    const MarketParams& params, const Payoff& payoff, const GridSpec& grid,
    const SolverConfig& cfg, double quote, int n_paths, int n_steps,
    std::uint64_t seed, double tolerance) {
    PriceInterval pi = price_interval(params, payoff, grid, cfg);

    if (quote < pi.h_up + tolerance && quote > pi.h_low - tolerance)
        throw InsideIntervalError(
            "quote lies inside the arbitrage-free interval (h_low, h_up); the "
            "extended market admits no arbitrage");

    ArbitrageDemo demo;
    demo.quote = quote;
    demo.h_low = pi.h_low;
    demo.h_up = pi.h_up;
    demo.side =
        quote >= pi.h_up ? ArbitrageSide::AboveHup : ArbitrageSide::BelowHlow;
    demo.tol = tolerance;
    demo.n_paths = 0;

    const bool above = demo.side == ArbitrageSide::AboveHup;
    const Payoff hedged = above ? payoff : payoff.negated();
    Surface surface = solve_bsb(params, hedged, grid, cfg);
    const double bound_capital = surface.value_at(0.0, params.spot);
    const double banked = above ? quote - demo.h_up : demo.h_low - quote;
    demo.banked_terminal = banked * std::exp(params.rate * params.horizon);

    // Sample priors: the band endpoints, three interior constants, and a few
    // random two-piece deterministic controls.
    std::vector<VolControl> priors;
    for (int i = 0; i < 5; ++i) {
        const double s = params.sigma_low +
                         (params.sigma_high - params.sigma_low) * i / 4.0;
        priors.push_back(ConstantControl{s});
    }
    for (int i = 0; i < 5; ++i) {
        const double u1 = uniform_open(philox::generate(seed ^ 0xA5A5, i, 0).v[0],
                                       philox::generate(seed ^ 0xA5A5, i, 0).v[1]);
        const double u2 = uniform_open(philox::generate(seed ^ 0xA5A5, i, 1).v[0],
                                       philox::generate(seed ^ 0xA5A5, i, 1).v[1]);
        DeterministicControl dc;
        dc.times = {0.0, params.horizon * (0.25 + 0.5 * u1)};
        dc.sigmas = {params.sigma_low + (params.sigma_high - params.sigma_low) * u2,
                     params.sigma_high - (params.sigma_high - params.sigma_low) * u2};
        priors.push_back(std::move(dc));
    }
    demo.n_priors = static_cast<int>(priors.size());

    double min_w = std::numeric_limits<double>::infinity();
    double sum_w = 0.0;
    long n_above = 0;
    long n_total = 0;
    int prior_idx = 0;
    for (const VolControl& prior : priors) {
        PathBatch batch = simulate_paths(params, prior, n_paths, n_steps,
                                         seed + 1000 * prior_idx++);
        for (int i = 0; i < n_paths; ++i) {
            // Unlike simulate_hedge, the consumption stream is not withdrawn:
            // the arbitrageur keeps it in the bond account, which only
            // strengthens the terminal dominance.
            double X = bound_capital;
            for (int k = 0; k < n_steps; ++k) {
                const double t = k * batch.dt;
                const double S = batch.S(k, i);
                const double phi = surface.delta_at(t, S);
                X += phi * (batch.S(k + 1, i) - S) +
                     (X - phi * S) * params.rate * batch.dt;
            }
            const double claim = payoff(batch.S(n_steps, i));
            // above: short claim at quote, long hedge; below: long claim at
            // quote, long the lower hedge (terminal >= -claim)
            const double wealth =
                (above ? X - claim : X + claim) + demo.banked_terminal;
            min_w = std::min(min_w, wealth);
            sum_w += wealth;
            if (wealth > tolerance) ++n_above;
            ++n_total;
        }
    }
    demo.n_paths = static_cast<int>(n_total);
    demo.min_terminal_wealth = min_w;
    demo.mean_terminal_wealth = sum_w / n_total;
    demo.fraction_above_tol = static_cast<double>(n_above) / n_total;
    return demo;
}

} // namespace uvol
