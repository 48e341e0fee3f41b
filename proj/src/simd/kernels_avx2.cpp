#include "uvol/simd/kernels.hpp"

#include "exp_constants.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define UVOL_HAVE_AVX2_BUILD 1
#include <immintrin.h>
#else
#define UVOL_HAVE_AVX2_BUILD 0
#endif

#include <cmath>
#include <cstdint>

namespace uvol::simd {

#if UVOL_HAVE_AVX2_BUILD

namespace {

using namespace detail;

// Mirrors exp_impl in kernels_scalar.cpp operation for operation so the two
// lanes agree bitwise: vroundpd(nearest) == nearbyint, vfmadd == std::fma.
inline __m256d exp4(__m256d x) {
    const __m256d sat = _mm256_set1_pd(kExpSat);
    x = _mm256_min_pd(x, sat);
    x = _mm256_max_pd(x, _mm256_sub_pd(_mm256_setzero_pd(), sat));
    const __m256d k = _mm256_round_pd(
        _mm256_mul_pd(x, _mm256_set1_pd(kLog2E)),
        _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d r = _mm256_fmadd_pd(k, _mm256_set1_pd(-kLn2Hi), x);
    r = _mm256_fmadd_pd(k, _mm256_set1_pd(-kLn2Lo), r);
    __m256d p = _mm256_set1_pd(kExpPoly[0]);
    for (int i = 1; i < 12; ++i)
        p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(kExpPoly[i]));
    const __m256d one = _mm256_set1_pd(1.0);
    p = _mm256_fmadd_pd(p, r, one);
    p = _mm256_fmadd_pd(p, r, one);
    // 2^k via the exponent field
    const __m128i ki32 = _mm256_cvtpd_epi32(k);
    const __m256i ki = _mm256_cvtepi32_epi64(ki32);
    const __m256i bits =
        _mm256_slli_epi64(_mm256_add_epi64(ki, _mm256_set1_epi64x(1023)), 52);
    return _mm256_mul_pd(p, _mm256_castsi256_pd(bits));
}

void path_step_avx2(double* S, double* qv, const double* z, const double* var,
                    std::size_t n, double rate, double dt) {
    const double rdt = rate * dt;
    const __m256d vrdt = _mm256_set1_pd(rdt);
    const __m256d vdtv = _mm256_set1_pd(dt);
    const __m256d mhalf = _mm256_set1_pd(-0.5);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d v = _mm256_loadu_pd(var + i);
        const __m256d vdt = _mm256_mul_pd(v, vdtv);
        const __m256d drift = _mm256_fmadd_pd(mhalf, vdt, vrdt);
        const __m256d arg =
            _mm256_fmadd_pd(_mm256_sqrt_pd(vdt), _mm256_loadu_pd(z + i), drift);
        const __m256d s =
            _mm256_mul_pd(_mm256_loadu_pd(S + i), exp4(arg));
        _mm256_storeu_pd(S + i, s);
        _mm256_storeu_pd(qv + i, _mm256_add_pd(_mm256_loadu_pd(qv + i), vdt));
    }
    for (; i < n; ++i) {
        const double vdt = var[i] * dt;
        const double arg =
            std::fma(std::sqrt(vdt), z[i], std::fma(-0.5, vdt, rdt));
        S[i] *= exp_ref(arg);
        qv[i] += vdt;
    }
}

void g_eval_avx2(double* out, const double* y, std::size_t n, double hh,
                 double hl) {
    const __m256d vhh = _mm256_set1_pd(hh);
    const __m256d vhl = _mm256_set1_pd(hl);
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d v = _mm256_loadu_pd(y + i);
        const __m256d mask = _mm256_cmp_pd(v, zero, _CMP_GE_OQ);
        const __m256d coef = _mm256_blendv_pd(vhl, vhh, mask);
        _mm256_storeu_pd(out + i, _mm256_mul_pd(coef, v));
    }
    for (; i < n; ++i) out[i] = (y[i] >= 0.0 ? hh : hl) * y[i];
}

void exp_avx2(double* out, const double* x, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, exp4(_mm256_loadu_pd(x + i)));
    for (; i < n; ++i) out[i] = exp_ref(x[i]);
}

} // namespace

bool avx2_available() {
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

const Kernels& avx2_kernels() {
    static const Kernels k{"avx2", path_step_avx2, g_eval_avx2, exp_avx2};
    return k;
}

#else

bool avx2_available() { return false; }
const Kernels& avx2_kernels() { return scalar_kernels(); }

#endif

} // namespace uvol::simd
