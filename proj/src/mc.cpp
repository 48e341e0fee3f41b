#include "uvol/mc.hpp"

#include "uvol/rng.hpp"
#include "uvol/simd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <atomic>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace uvol {

namespace {

constexpr double kBandSlack = 1e-12;

std::atomic<int> g_thread_count{1};

double deterministic_sigma(const DeterministicControl& c, double t) {
    // last k with times[k] <= t
    std::size_t k = 0;
    while (k + 1 < c.times.size() && c.times[k + 1] <= t) ++k;
    return c.sigmas[k];
}

// One simulation step for paths [0, n): look up the control, draw normals,
// advance stock and quadratic variation through the active SIMD lane.
struct StepContext {
    const MarketParams& params;
    const VolControl& control;
    std::uint64_t seed;
    double dt;

    void run(int step, double* S, double* qv, double* var, double* z,
             double* sigma_out, std::size_t n, std::size_t path_offset) const {
        const double t = step * dt;
        for (std::size_t i = 0; i < n; ++i) {
            const double sig = control_sigma(control, t, S[i]);
            sigma_out[i] = sig;
            var[i] = sig * sig;
            z[i] = normal_draw(seed, path_offset + i, static_cast<std::uint64_t>(step));
        }
        simd::active_kernels().path_step(S, qv, z, var, n, params.rate, dt);
    }
};

} // namespace

std::string describe(const VolControl& c) {
    std::ostringstream os;
    if (const auto* cc = std::get_if<ConstantControl>(&c)) {
        os << "constant(sigma=" << cc->sigma << ")";
    } else if (const auto* dc = std::get_if<DeterministicControl>(&c)) {
        os << "deterministic(" << dc->sigmas.size() << " pieces)";
    } else {
        os << "feedback(surface)";
    }
    return os.str();
}

void validate_control(const VolControl& c, const MarketParams& p) {
    const double lo = p.sigma_low - kBandSlack;
    const double hi = p.sigma_high + kBandSlack;
    if (const auto* cc = std::get_if<ConstantControl>(&c)) {
        if (cc->sigma < lo || cc->sigma > hi)
            throw std::invalid_argument("VolControl: constant sigma outside band");
    } else if (const auto* dc = std::get_if<DeterministicControl>(&c)) {
        if (dc->times.empty() || dc->times.size() != dc->sigmas.size())
            throw std::invalid_argument("VolControl: malformed step function");
        if (dc->times.front() != 0.0)
            throw std::invalid_argument("VolControl: step function must start at t=0");
        for (std::size_t i = 1; i < dc->times.size(); ++i)
            if (dc->times[i] <= dc->times[i - 1])
                throw std::invalid_argument("VolControl: times must be ascending");
        for (double s : dc->sigmas)
            if (s < lo || s > hi)
                throw std::invalid_argument("VolControl: sigma outside band");
    } else {
        const auto* fc = std::get_if<FeedbackControl>(&c);
        if (fc->surface == nullptr)
            throw std::invalid_argument("VolControl: feedback surface missing");
        const MarketParams& sp = fc->surface->params();
        if (sp.sigma_low != p.sigma_low || sp.sigma_high != p.sigma_high ||
            sp.rate != p.rate || sp.horizon != p.horizon)
            throw std::invalid_argument(
                "VolControl: feedback surface solved under different parameters");
    }
}

double control_sigma(const VolControl& c, double t, double s) {
    if (const auto* cc = std::get_if<ConstantControl>(&c)) return cc->sigma;
    if (const auto* dc = std::get_if<DeterministicControl>(&c))
        return deterministic_sigma(*dc, t);
    return std::get<FeedbackControl>(c).surface->control_at(t, s);
}

PathBatch simulate_paths(const MarketParams& params, const VolControl& control,
                         int n_paths, int n_steps, std::uint64_t seed) {
    if (n_paths < 1 || n_steps < 1)
        throw std::invalid_argument("simulate_paths: n_paths, n_steps >= 1");
    validate_control(control, params);

    PathBatch b;
    b.n_paths = n_paths;
    b.n_steps = n_steps;
    b.seed = seed;
    b.dt = params.horizon / n_steps;
    const std::size_t np = static_cast<std::size_t>(n_paths);
    b.stock.assign((n_steps + 1) * np, params.spot);
    b.qv.assign((n_steps + 1) * np, 0.0);
    b.control_used.assign(n_steps * np, 0.0);

    std::vector<double> var(np), z(np);
    StepContext ctx{params, control, seed, b.dt};
    for (int k = 0; k < n_steps; ++k) {
        double* S_next = &b.stock[(k + 1) * np];
        double* qv_next = &b.qv[(k + 1) * np];
        std::copy_n(&b.stock[k * np], np, S_next);
        std::copy_n(&b.qv[k * np], np, qv_next);
        ctx.run(k, S_next, qv_next, var.data(), z.data(),
                &b.control_used[k * np], np, 0);
    }
    return b;
}

void set_thread_count(int n) { g_thread_count = std::max(1, n); }
int thread_count() { return g_thread_count; }

double pairwise_sum(const double* data, std::size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += data[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(data, half) + pairwise_sum(data + half, n - half);
}

McEstimate estimate_claim(const MarketParams& params, const Payoff& payoff,
                          const VolControl& control, int n_paths, int n_steps,
                          std::uint64_t seed) {
    if (n_paths < 1 || n_steps < 1)
        throw std::invalid_argument("estimate_claim: n_paths, n_steps >= 1");
    validate_control(control, params);

    const double dt = params.horizon / n_steps;
    const double df = std::exp(-params.rate * params.horizon);
    std::vector<double> disc_payoff(n_paths);

    constexpr std::size_t kBlock = 4096;
    StepContext ctx{params, control, seed, dt};

    auto run_range = [&](std::size_t lo, std::size_t hi) {
        std::vector<double> S(kBlock), qv(kBlock), var(kBlock), z(kBlock),
            sig(kBlock);
        for (std::size_t base = lo; base < hi; base += kBlock) {
            const std::size_t n = std::min(kBlock, hi - base);
            std::fill_n(S.data(), n, params.spot);
            std::fill_n(qv.data(), n, 0.0);
            for (int k = 0; k < n_steps; ++k)
                ctx.run(k, S.data(), qv.data(), var.data(), z.data(),
                        sig.data(), n, base);
            for (std::size_t i = 0; i < n; ++i)
                disc_payoff[base + i] = df * payoff(S[i]);
        }
    };

    const std::size_t total = static_cast<std::size_t>(n_paths);
    const int nthreads = std::max(1, std::min<int>(thread_count(),
                                                   static_cast<int>((total + kBlock - 1) / kBlock)));
    if (nthreads == 1) {
        run_range(0, total);
    } else {
        // split on block boundaries; path streams are counter-addressed so
        // the partition does not affect the draws
        std::vector<std::thread> workers;
        const std::size_t blocks = (total + kBlock - 1) / kBlock;
        const std::size_t per = (blocks + nthreads - 1) / nthreads;
        for (int w = 0; w < nthreads; ++w) {
            const std::size_t lo = std::min(total, w * per * kBlock);
            const std::size_t hi = std::min(total, (w + 1) * per * kBlock);
            if (lo < hi) workers.emplace_back(run_range, lo, hi);
        }
        for (auto& th : workers) th.join();
    }

    McEstimate e;
    e.n_paths = n_paths;
    e.control = describe(control);
    e.value = pairwise_sum(disc_payoff.data(), disc_payoff.size()) / n_paths;
    std::vector<double> sq(n_paths);
    for (int i = 0; i < n_paths; ++i) {
        const double d = disc_payoff[i] - e.value;
        sq[i] = d * d;
    }
    const double variance =
        n_paths > 1 ? pairwise_sum(sq.data(), sq.size()) / (n_paths - 1) : 0.0;
    e.std_error = std::sqrt(variance / n_paths);
    return e;
}

McEstimate estimate_sup(const MarketParams& params, const Payoff& payoff,
                        const std::vector<VolControl>& family, int n_paths,
                        int n_steps, std::uint64_t seed) {
    if (family.empty())
        throw std::invalid_argument("estimate_sup: empty control family");
    McEstimate best;
    for (std::size_t i = 0; i < family.size(); ++i) {
        McEstimate e =
            estimate_claim(params, payoff, family[i], n_paths, n_steps, seed);
        if (i == 0 || e.value > best.value) {
            best = e;
            best.maximizer_index = static_cast<int>(i);
        }
    }
    return best;
}

QvReport qv_bounds_check(const PathBatch& batch, const MarketParams& params) {
    QvReport r;
    const std::size_t np = batch.n_paths;
    double min_rate = std::numeric_limits<double>::infinity();
    double max_rate = -min_rate;
    for (int k = 0; k < batch.n_steps; ++k) {
        for (std::size_t i = 0; i < np; ++i) {
            const double inc =
                (batch.qv_at(k + 1, static_cast<int>(i)) -
                 batch.qv_at(k, static_cast<int>(i))) / batch.dt;
            min_rate = std::min(min_rate, inc);
            max_rate = std::max(max_rate, inc);
        }
    }
    r.min_rate = min_rate;
    r.max_rate = max_rate;
    double tmin = std::numeric_limits<double>::infinity();
    double tmax = -tmin;
    for (std::size_t i = 0; i < np; ++i) {
        const double q = batch.qv_at(batch.n_steps, static_cast<int>(i));
        tmin = std::min(tmin, q);
        tmax = std::max(tmax, q);
    }
    r.qv_total_min = tmin;
    r.qv_total_max = tmax;
    const double vlo = params.sigma_low * params.sigma_low;
    const double vhi = params.sigma_high * params.sigma_high;
    const double tol = 1e-10 * vhi;
    r.within_bounds = min_rate >= vlo - tol && max_rate <= vhi + tol;
    return r;
}

} // namespace uvol
