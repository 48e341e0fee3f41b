#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace uvol {

enum class ConvexityClass { Convex, Concave, Linear, Mixed };

inline const char* to_string(ConvexityClass c) {
    switch (c) {
        case ConvexityClass::Convex: return "convex";
        case ConvexityClass::Concave: return "concave";
        case ConvexityClass::Linear: return "linear";
        case ConvexityClass::Mixed: return "mixed";
    }
    return "?";
}

// Terminal claim Phi(S_T). Every builtin is canonicalized to a piecewise
// linear function: interior knots plus left/right extrapolation slopes.
// Classification and the solver terminal condition read the canonical form.
class Payoff {
public:
    struct Knot {
        double x;
        double value;
    };

    static Payoff call(double strike) {
        require(strike > 0, "call: strike must be > 0");
        Payoff p({{strike, 0.0}}, 0.0, 1.0, "call(" + fmt(strike) + ")");
        return p;
    }

    static Payoff put(double strike) {
        require(strike > 0, "put: strike must be > 0");
        // left slope -1 continues K - x below zero, keeping the canonical
        // slope sequence monotone (the x >= 0 domain never evaluates it)
        return Payoff({{0.0, strike}, {strike, 0.0}}, -1.0, 0.0,
                      "put(" + fmt(strike) + ")");
    }

    static Payoff forward(double strike) {
        require(strike >= 0, "forward: strike must be >= 0");
        return Payoff({{strike, 0.0}}, 1.0, 1.0, "forward(" + fmt(strike) + ")",
                      /*allow_negative=*/true);
    }

    static Payoff bull_spread(double k_low, double k_high) {
        require(k_low > 0 && k_high > k_low,
                "bull_spread: need 0 < k_low < k_high");
        return Payoff({{k_low, 0.0}, {k_high, k_high - k_low}}, 0.0, 0.0,
                      "bull_spread(" + fmt(k_low) + "," + fmt(k_high) + ")");
    }

    static Payoff piecewise_linear(std::vector<Knot> knots, double left_slope,
                                   double right_slope, bool allow_negative = false) {
        require(!knots.empty(), "piecewise_linear: needs at least one knot");
        for (std::size_t i = 0; i < knots.size(); ++i) {
            require(knots[i].x >= 0.0, "piecewise_linear: knot x must be >= 0");
            if (i > 0)
                require(knots[i].x > knots[i - 1].x,
                        "piecewise_linear: knots must be strictly increasing");
        }
        return Payoff(std::move(knots), left_slope, right_slope,
                      "piecewise_linear", allow_negative);
    }

    double operator()(double x) const {
        if (x < 0.0) throw std::domain_error("Payoff: negative underlying");
        // locate segment: knots_[i].x <= x < knots_[i+1].x
        if (x <= knots_.front().x)
            return knots_.front().value - left_slope_ * (knots_.front().x - x);
        if (x >= knots_.back().x)
            return knots_.back().value + right_slope_ * (x - knots_.back().x);
        auto it = std::upper_bound(knots_.begin(), knots_.end(), x,
                                   [](double v, const Knot& k) { return v < k.x; });
        const Knot& hi = *it;
        const Knot& lo = *(it - 1);
        double w = (x - lo.x) / (hi.x - lo.x);
        return lo.value + w * (hi.value - lo.value);
    }

    // Slope sequence left to right (left_slope, interior slopes, right_slope).
    std::vector<double> slopes() const {
        std::vector<double> s;
        s.push_back(left_slope_);
        for (std::size_t i = 1; i < knots_.size(); ++i)
            s.push_back((knots_[i].value - knots_[i - 1].value) /
                        (knots_[i].x - knots_[i - 1].x));
        s.push_back(right_slope_);
        return s;
    }

    ConvexityClass convexity() const {
        auto s = slopes();
        bool nondec = true, noninc = true;
        for (std::size_t i = 1; i < s.size(); ++i) {
            if (s[i] < s[i - 1]) nondec = false;
            if (s[i] > s[i - 1]) noninc = false;
        }
        if (nondec && noninc) return ConvexityClass::Linear;
        if (nondec) return ConvexityClass::Convex;
        if (noninc) return ConvexityClass::Concave;
        return ConvexityClass::Mixed;
    }

    double lipschitz_bound() const {
        double m = 0.0;
        for (double s : slopes()) m = std::max(m, std::abs(s));
        return m;
    }

    // Claims sold in the market must be nonnegative. The solver's lower-price
    // pathway negates the payoff internally, where negativity is expected.
    bool nonnegative() const {
        double v0 = knots_.front().value - left_slope_ * knots_.front().x;
        if (v0 < 0.0) return false;
        for (const Knot& k : knots_)
            if (k.value < 0.0) return false;
        return right_slope_ >= 0.0;  // negative tail slope eventually dips below 0
    }

    Payoff negated() const {
        std::vector<Knot> k = knots_;
        for (Knot& kn : k) kn.value = -kn.value;
        Payoff p(std::move(k), -left_slope_, -right_slope_,
                 "-" + name_, /*allow_negative=*/true);
        return p;
    }

    const std::vector<Knot>& knots() const { return knots_; }
    double left_slope() const { return left_slope_; }
    double right_slope() const { return right_slope_; }
    const std::string& name() const { return name_; }

private:
    Payoff(std::vector<Knot> knots, double left_slope, double right_slope,
           std::string name, bool allow_negative = false)
        : knots_(std::move(knots)), left_slope_(left_slope),
          right_slope_(right_slope), name_(std::move(name)) {
        if (!allow_negative && !nonnegative())
            throw std::invalid_argument("Payoff: claim must be nonnegative");
    }

    static void require(bool ok, const char* msg) {
        if (!ok) throw std::invalid_argument(msg);
    }
    static std::string fmt(double v) {
        std::string s = std::to_string(v);
        s.erase(s.find_last_not_of('0') + 1);
        if (!s.empty() && s.back() == '.') s.pop_back();
        return s;
    }

    std::vector<Knot> knots_;
    double left_slope_;
    double right_slope_;
    std::string name_;
};

} // namespace uvol
