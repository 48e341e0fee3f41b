#pragma once

#include "uvol/market.hpp"

#include <cmath>
#include <cstddef>
#include <ostream>
#include <stdexcept>
#include <vector>

namespace uvol {

// Uniform grid in (t, y = ln x). The y-domain spans log_width upper-band
// standard deviations either side of ln spot, so the spot sits exactly on
// the center node whenever n_space is odd.
struct GridSpec {
    int n_space = 401;
    int n_time = 200;
    double log_width = 5.0;

    void validate() const {
        if (n_space < 16) throw std::invalid_argument("GridSpec: n_space >= 16 required");
        if (n_time < 8) throw std::invalid_argument("GridSpec: n_time >= 8 required");
        if (!(log_width > 0)) throw std::invalid_argument("GridSpec: log_width > 0 required");
    }

    GridSpec refined(int k) const {
        GridSpec g = *this;
        for (int i = 0; i < k; ++i) {
            g.n_space = 2 * g.n_space - 1;
            g.n_time *= 2;
        }
        return g;
    }
};

// Discretized value function u(t_i, x_j) with the fields the hedge needs:
// delta, gamma and the pointwise worst-case volatility. Immutable once the
// solver returns it.
class Surface {
public:
    Surface(MarketParams params, GridSpec grid)
        : params_(params), grid_(grid) {
        grid_.validate();
        const double width = grid_.log_width * params_.sigma_high *
                             std::sqrt(params_.horizon);
        y_min_ = std::log(params_.spot) - width;
        dy_ = 2.0 * width / (grid_.n_space - 1);
        dt_ = params_.horizon / grid_.n_time;
        const std::size_t n =
            static_cast<std::size_t>(grid_.n_time + 1) * grid_.n_space;
        values_.assign(n, 0.0);
        control_.assign(n, 0.0);
        delta_.assign(n, 0.0);
        gamma_.assign(n, 0.0);
    }

    const MarketParams& params() const { return params_; }
    const GridSpec& grid() const { return grid_; }

    int n_space() const { return grid_.n_space; }
    int n_time() const { return grid_.n_time; }
    double dy() const { return dy_; }
    double dt() const { return dt_; }
    double y_min() const { return y_min_; }
    double y_node(int j) const { return y_min_ + j * dy_; }
    double x_node(int j) const { return std::exp(y_node(j)); }
    double t_node(int i) const { return i * dt_; }
    int center_index() const { return (grid_.n_space - 1) / 2; }

    double value(int i, int j) const { return values_[idx(i, j)]; }
    double control(int i, int j) const { return control_[idx(i, j)]; }
    double delta(int i, int j) const { return delta_[idx(i, j)]; }
    double gamma(int i, int j) const { return gamma_[idx(i, j)]; }

    double value_at(double t, double s) const { return bilinear(values_, t, s); }
    double delta_at(double t, double s) const { return bilinear(delta_, t, s); }
    double gamma_at(double t, double s) const { return bilinear(gamma_, t, s); }

    // Feedback control: nearest node in (t, ln s), clamped at domain edges.
    double control_at(double t, double s) const {
        int i = static_cast<int>(std::lround(t / dt_));
        i = std::min(std::max(i, 0), grid_.n_time);
        int j = static_cast<int>(std::lround((std::log(s) - y_min_) / dy_));
        j = std::min(std::max(j, 0), grid_.n_space - 1);
        return control_[idx(i, j)];
    }

    bool in_domain(double t, double s) const {
        if (t < 0.0 || t > params_.horizon || !(s > 0.0)) return false;
        const double y = std::log(s);
        return y >= y_min_ && y <= y_min_ + (grid_.n_space - 1) * dy_;
    }

    // CSV export: t,x,u,delta,gamma,control with 17 significant digits.
    void write_csv(std::ostream& os) const;

    // mutable access for the solver
    double& value_rw(int i, int j) { return values_[idx(i, j)]; }
    double& control_rw(int i, int j) { return control_[idx(i, j)]; }
    double& delta_rw(int i, int j) { return delta_[idx(i, j)]; }
    double& gamma_rw(int i, int j) { return gamma_[idx(i, j)]; }

private:
    std::size_t idx(int i, int j) const {
        return static_cast<std::size_t>(i) * grid_.n_space + j;
    }

    double bilinear(const std::vector<double>& field, double t, double s) const {
        if (!in_domain(t, s))
            throw std::out_of_range("Surface: query outside grid domain");
        double ft = t / dt_;
        int i0 = std::min(static_cast<int>(ft), grid_.n_time - 1);
        double a = ft - i0;
        double fy = (std::log(s) - y_min_) / dy_;
        int j0 = std::min(static_cast<int>(fy), grid_.n_space - 2);
        double b = fy - j0;
        const double v00 = field[idx(i0, j0)], v01 = field[idx(i0, j0 + 1)];
        const double v10 = field[idx(i0 + 1, j0)], v11 = field[idx(i0 + 1, j0 + 1)];
        return (1 - a) * ((1 - b) * v00 + b * v01) +
               a * ((1 - b) * v10 + b * v11);
    }

    MarketParams params_;
    GridSpec grid_;
    double y_min_, dy_, dt_;
    std::vector<double> values_, control_, delta_, gamma_;
};

} // namespace uvol
