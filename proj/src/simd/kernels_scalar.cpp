#include "uvol/simd/kernels.hpp"

#include "exp_constants.hpp"

#include <bit>
#include <cmath>
#include <cstdint>

namespace uvol::simd {

namespace {

using namespace detail;

inline double exp_impl(double x) {
    if (x > kExpSat) x = kExpSat;
    if (x < -kExpSat) x = -kExpSat;
    double k = std::nearbyint(x * kLog2E);
    double r = std::fma(k, -kLn2Hi, x);
    r = std::fma(k, -kLn2Lo, r);
    double p = kExpPoly[0];
    for (int i = 1; i < 12; ++i) p = std::fma(p, r, kExpPoly[i]);
    p = std::fma(p, r, 1.0);
    p = std::fma(p, r, 1.0);
    // scale by 2^k through the exponent field; |k| <= 1011 so the result
    // stays normal for saturated inputs
    std::int64_t ki = static_cast<std::int64_t>(k);
    double scale = std::bit_cast<double>((ki + 1023) << 52);
    return p * scale;
}

void path_step_scalar(double* S, double* qv, const double* z,
                      const double* var, std::size_t n, double rate,
                      double dt) {
    const double rdt = rate * dt;
    for (std::size_t i = 0; i < n; ++i) {
        const double vdt = var[i] * dt;
        const double arg =
            std::fma(std::sqrt(vdt), z[i], std::fma(-0.5, vdt, rdt));
        S[i] *= exp_impl(arg);
        qv[i] += vdt;
    }
}

void g_eval_scalar(double* out, const double* y, std::size_t n, double hh,
                   double hl) {
    for (std::size_t i = 0; i < n; ++i) out[i] = (y[i] >= 0.0 ? hh : hl) * y[i];
}

void exp_scalar(double* out, const double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = exp_impl(x[i]);
}

} // namespace

double exp_ref(double x) { return exp_impl(x); }

const Kernels& scalar_kernels() {
    static const Kernels k{"scalar", path_step_scalar, g_eval_scalar,
                           exp_scalar};
    return k;
}

} // namespace uvol::simd
