#include "uvol/bsb.hpp"

#include "uvol/closed_form.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace uvol {

namespace {

// Stencil weights on the uniform y-grid, exponentially fitted so that both
// operators annihilate functions linear in x = e^y exactly:
//   curvature  c_j ~ x^2 u_xx = kappa (e^h u_{j-1} - (1+e^h) u_j + u_{j+1})
//   drift      d_j ~ x u_x    = (u_{j+1} - u_{j-1}) / (e^h - e^{-h})
struct Stencil {
    double h, eh, emh, s2, kappa;
    explicit Stencil(double dy)
        : h(dy), eh(std::exp(dy)), emh(std::exp(-dy)), s2(eh - emh),
          kappa(2.0 / ((eh - 1.0) * s2)) {}
};

class Stepper {
public:
    Stepper(const MarketParams& p, const SolverConfig& cfg, int n, double dy)
        : p_(p), g_(p), cfg_(cfg), n_(n), st_(dy), curv_(n),
          sub_(n), diag_(n), sup_(n), rhs_(n), cprime_(n), x_(n) {}

    void set_x(const std::vector<double>& x) { x_ = x; }

    // x^2 u_xx at interior nodes; boundary entries zero (the boundary
    // condition imposes vanishing x-curvature there).
    void curvature(const std::vector<double>& u, std::vector<double>& c) const {
        c[0] = 0.0;
        c[n_ - 1] = 0.0;
        for (int j = 1; j < n_ - 1; ++j)
            c[j] = st_.kappa *
                   (st_.eh * u[j - 1] - (1.0 + st_.eh) * u[j] + u[j + 1]);
    }

    // Bang-bang control from the curvature sign. The tie threshold combines
    // the configured tie_tol with a round-off floor: second differences of
    // values of size ~max(|u|, x) cannot resolve curvature below
    // ~kappa scale times a small multiple of eps (1024 eps covers the noise
    // accumulated over the time march). Within a tie region the sweep continues the
    // previously decided node's control (either choice is optimal where the
    // curvature is numerically zero, and continuing keeps the field a clean
    // single-threshold policy instead of flipping on round-off).
    void select_control(const std::vector<double>& u,
                        std::vector<double>& vol) const {
        curvature(u, curv_);
        constexpr double eps = std::numeric_limits<double>::epsilon();
        // signed exceedance of the per-node tie threshold
        sign_.assign(n_, 0);
        for (int j = 1; j < n_ - 1; ++j) {
            const double scale =
                std::max({std::abs(u[j - 1]), 2.0 * std::abs(u[j]),
                          std::abs(u[j + 1]), x_[j]});
            const double tie =
                std::max(cfg_.tie_tol, 1024.0 * eps * st_.kappa * scale);
            if (curv_[j] > tie) sign_[j] = 1;
            else if (curv_[j] < -tie) sign_[j] = -1;
        }
        // The carried control flips only where the curvature sign persists on
        // two adjacent nodes: an isolated one-node feature is below grid
        // resolution, and time-march round-off noise alternates in sign.
        double carried = g_.sigma_high();
        for (int j = 1; j < n_ - 1; ++j) {
            const int nb = (j + 1 < n_ - 1) ? j + 1 : j - 1;
            if (sign_[j] == 1 && (sign_[j - 1] == 1 || sign_[nb] == 1))
                carried = g_.sigma_high();
            else if (sign_[j] == -1 && (sign_[j - 1] == -1 || sign_[nb] == -1))
                carried = g_.sigma_low();
            vol[j] = carried;
        }
        vol[0] = vol[1];
        vol[n_ - 1] = vol[n_ - 2];
    }

    // Explicit evaluation of  L_v u = r x u_x + v^2/2 x^2 u_xx - r u  under
    // the selected control field (used for the Crank-Nicolson half). Using
    // the frozen policy instead of the pointwise nonlinearity keeps the
    // operator linear in the value, so tie-level curvature noise is not
    // rectified by the undamped Crank-Nicolson sawtooth mode; at the selected
    // control the two agree wherever the curvature is resolvable.
    void apply_nonlinear(const std::vector<double>& u,
                         const std::vector<double>& vol,
                         std::vector<double>& out) const {
        curvature(u, curv_);
        const double r = p_.rate;
        for (int j = 1; j < n_ - 1; ++j)
            out[j] = r * (u[j + 1] - u[j - 1]) / st_.s2 +
                     0.5 * vol[j] * vol[j] * curv_[j] - r * u[j];
        out[0] = r * (1.0 + st_.emh) * (u[1] - u[0]) / st_.s2 - r * u[0];
        out[n_ - 1] =
            r * (1.0 + st_.eh) * (u[n_ - 1] - u[n_ - 2]) / st_.s2 - r * u[n_ - 1];
    }

    // One implicit stage (I - dtau L_v) u = rhs by policy iteration over the
    // two-element control set. Returns the number of linear solves.
    int implicit_stage(double dtau, const std::vector<double>& rhs,
                       std::vector<double>& u, std::vector<double>& vol,
                       double* residual_out) const {
        const double r = p_.rate;
        double residual = std::numeric_limits<double>::infinity();
        std::vector<double> u_prev;
        std::vector<double> vol_prev;
        for (int iter = 1; iter <= cfg_.max_policy_iters; ++iter) {
            for (int j = 1; j < n_ - 1; ++j) {
                const double hv = 0.5 * vol[j] * vol[j];
                sub_[j] = -dtau * (hv * st_.kappa * st_.eh - r / st_.s2);
                diag_[j] = 1.0 + dtau * (hv * st_.kappa * (1.0 + st_.eh) + r);
                sup_[j] = -dtau * (hv * st_.kappa + r / st_.s2);
            }
            const double g0 = r * (1.0 + st_.emh) / st_.s2;
            diag_[0] = 1.0 + dtau * (g0 + r);
            sup_[0] = -dtau * g0;
            const double gN = r * (1.0 + st_.eh) / st_.s2;
            sub_[n_ - 1] = dtau * gN;
            diag_[n_ - 1] = 1.0 + dtau * (r - gN);

            u_prev = u;
            thomas(rhs, u);

            residual = 0.0;
            double umax = 0.0;
            for (int j = 0; j < n_; ++j) {
                residual = std::max(residual, std::abs(u[j] - u_prev[j]));
                umax = std::max(umax, std::abs(u[j]));
            }

            std::vector<double> vol_new(n_);
            select_control(u, vol_new);
            // a period-2 control cycle flips only tie-level nodes; accept it
            const bool stationary = vol_new == vol || vol_new == vol_prev;
            vol_prev = vol;
            vol = std::move(vol_new);
            if (stationary || residual <= cfg_.policy_tol * (1.0 + umax)) {
                if (residual_out) *residual_out = residual;
                return iter;
            }
        }
        throw SolverError("bsb_solver: policy iteration did not converge",
                          residual);
    }

private:
    void thomas(const std::vector<double>& d, std::vector<double>& u) const {
        cprime_[0] = sup_[0] / diag_[0];
        rhs_[0] = d[0] / diag_[0];
        for (int j = 1; j < n_; ++j) {
            const double m = diag_[j] - sub_[j] * cprime_[j - 1];
            cprime_[j] = sup_[j] / m;
            rhs_[j] = (d[j] - sub_[j] * rhs_[j - 1]) / m;
        }
        u[n_ - 1] = rhs_[n_ - 1];
        for (int j = n_ - 2; j >= 0; --j) u[j] = rhs_[j] - cprime_[j] * u[j + 1];
    }

    const MarketParams& p_;
    GFunction g_;
    const SolverConfig& cfg_;
    int n_;
    Stencil st_;
    mutable std::vector<double> curv_;
    mutable std::vector<int> sign_;
    mutable std::vector<double> sub_, diag_, sup_, rhs_, cprime_;
    std::vector<double> x_;
};

} // namespace

Surface solve_bsb(const MarketParams& params, const Payoff& payoff,
                  const GridSpec& grid, const SolverConfig& cfg,
                  SolveDiagnostics* diag) {
    grid.validate();
    cfg.validate();
    Surface surf(params, grid);
    const int n = grid.n_space;
    const int nt = grid.n_time;
    const double dt = surf.dt();
    const Stencil st(surf.dy());

    std::vector<double> x(n);
    for (int j = 0; j < n; ++j) x[j] = surf.x_node(j);

    Stepper stepper(params, cfg, n, surf.dy());
    stepper.set_x(x);

    std::vector<double> u(n), vol(n), lu(n), rhs(n);
    for (int j = 0; j < n; ++j) u[j] = payoff(x[j]);

    SolveDiagnostics d;

    auto record_slice = [&](int i, const std::vector<double>& uu,
                            const std::vector<double>& vv) {
        std::vector<double> c(n);
        stepper.curvature(uu, c);
        for (int j = 0; j < n; ++j) {
            surf.value_rw(i, j) = uu[j];
            surf.control_rw(i, j) = vv[j];
            surf.gamma_rw(i, j) = c[j] / (x[j] * x[j]);
            double uy;
            if (j == 0)
                uy = (1.0 + st.emh) * (uu[1] - uu[0]) / st.s2;
            else if (j == n - 1)
                uy = (1.0 + st.eh) * (uu[n - 1] - uu[n - 2]) / st.s2;
            else
                uy = (uu[j + 1] - uu[j - 1]) / st.s2;
            surf.delta_rw(i, j) = uy / x[j];
        }
    };

    stepper.select_control(u, vol);
    record_slice(nt, u, vol);

    for (int step = 0; step < nt; ++step) {
        double res = 0.0;
        int iters = 0;
        if (step < cfg.rannacher_steps) {
            for (int half = 0; half < 2; ++half) {
                rhs = u;
                iters += stepper.implicit_stage(0.5 * dt, rhs, u, vol, &res);
            }
        } else {
            stepper.apply_nonlinear(u, vol, lu);
            for (int j = 0; j < n; ++j) rhs[j] = u[j] + 0.5 * dt * lu[j];
            iters = stepper.implicit_stage(0.5 * dt, rhs, u, vol, &res);
        }
        d.total_policy_iters += iters;
        d.max_policy_iters_step = std::max(d.max_policy_iters_step, iters);
        d.final_residual = res;
        record_slice(nt - 1 - step, u, vol);
    }

    if (diag) *diag = d;
    return surf;
}

PriceInterval price_interval(const MarketParams& params, const Payoff& payoff,
                             const GridSpec& grid, const SolverConfig& cfg) {
    PriceInterval out;
    out.grid = grid;

    SolveDiagnostics d_up, d_low;
    Surface up = solve_bsb(params, payoff, grid, cfg, &d_up);
    Surface low = solve_bsb(params, payoff.negated(), grid, cfg, &d_low);

    const double s0 = params.spot;
    out.h_up = up.value_at(0.0, s0);
    out.h_low = -low.value_at(0.0, s0);

    out.diagnostics.total_policy_iters =
        d_up.total_policy_iters + d_low.total_policy_iters;
    out.diagnostics.max_policy_iters_step =
        std::max(d_up.max_policy_iters_step, d_low.max_policy_iters_step);
    out.diagnostics.final_residual =
        std::max(d_up.final_residual, d_low.final_residual);

    const double mid = 0.5 * (params.sigma_low + params.sigma_high);
    for (double s : {params.sigma_low, mid, params.sigma_high})
        out.bs_mid.push_back(
            {s, bs_price_payoff(payoff, s0, params.rate, s, params.horizon)});
    return out;
}

HedgePosition extract_hedge(const Surface& surface, double t, double s) {
    if (!surface.in_domain(t, s))
        throw std::out_of_range("extract_hedge: (t, s) outside grid domain");
    const double phi = surface.delta_at(t, s);
    const double u = surface.value_at(t, s);
    const double growth = std::exp(surface.params().rate * t);
    return {phi, (u - phi * s) / growth};
}

double consumption_increment(const Surface& surface, double t, double s,
                             double realized_qv_rate, double dt,
                             const SolverConfig& cfg) {
    const MarketParams& p = surface.params();
    const double vlo = p.sigma_low * p.sigma_low;
    const double vhi = p.sigma_high * p.sigma_high;
    const double slack = 1e-12 * vhi;
    if (realized_qv_rate < vlo - slack || realized_qv_rate > vhi + slack)
        throw std::domain_error(
            "consumption_increment: realized qv rate outside the band");
    if (!(dt > 0)) throw std::invalid_argument("consumption_increment: dt <= 0");
    const GFunction g(p);
    const double gamma = surface.gamma_at(t, s);
    const double s2 = s * s;
    const double dc = (-0.5 * gamma * s2 * realized_qv_rate + g(gamma) * s2) * dt;
    // g(gamma) >= qv_rate * gamma / 2 for every in-band rate, so dc >= 0 up
    // to interpolation round-off
    if (dc < -cfg.consumption_tol)
        throw SolverError("consumption_increment: negative increment", dc);
    return std::max(dc, 0.0);
}

double bs_price_payoff(const Payoff& payoff, double spot, double rate,
                       double sigma, double tau) {
    const auto& knots = payoff.knots();
    const auto slopes = payoff.slopes();
    const double df = std::exp(-rate * tau);
    const double v0 = payoff(0.0);

    // slope of the first segment right of x = 0
    double first_slope = knots.front().x > 0.0 ? slopes[0] : slopes[1];

    double price = df * v0 + first_slope * spot;
    for (std::size_t i = 0; i < knots.size(); ++i) {
        if (knots[i].x <= 0.0) continue;
        const double ds = slopes[i + 1] - slopes[i];
        if (ds != 0.0)
            price += ds * bs_call(spot, knots[i].x, rate, sigma, tau).price;
    }
    return price;
}

} // namespace uvol
