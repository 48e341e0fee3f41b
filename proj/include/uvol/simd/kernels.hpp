#pragma once

#include <cstddef>

namespace uvol::simd {

// Data-parallel inner-loop kernels. The scalar lane is the reference; the
// AVX2 lane must produce bit-identical output (both build on the same
// fma-based exp so results do not depend on the selected lane).
struct Kernels {
    const char* name;

    // In-place log-Euler step for a batch of paths:
    //   vdt   = var[i] * dt
    //   S[i] *= exp( fma(sqrt(vdt), z[i], fma(-0.5, vdt, r*dt)) )
    //   qv[i] += vdt
    void (*path_step)(double* S, double* qv, const double* z,
                      const double* var, std::size_t n, double rate, double dt);

    // out[i] = hh * y[i] for y[i] >= 0, hl * y[i] otherwise.
    void (*g_eval)(double* out, const double* y, std::size_t n, double hh,
                   double hl);

    // out[i] = exp(x[i]), inputs saturated to [-700, 700].
    void (*exp)(double* out, const double* x, std::size_t n);
};

const Kernels& scalar_kernels();

bool avx2_available();
const Kernels& avx2_kernels();

// Runtime selection: AVX2 when the CPU supports it, scalar otherwise.
// Environment variable UVOL_SIMD=scalar|avx2 forces a lane.
const Kernels& active_kernels();

// Scalar reference exp shared by both lanes (|error| <= ~2 ulp on
// [-700, 700]; inputs outside are saturated).
double exp_ref(double x);

} // namespace uvol::simd
