#pragma once

// Constants shared by the scalar and AVX2 exp implementations. Both lanes
// must execute the identical operation sequence: k = nearbyint(x * LOG2E),
// Cody-Waite reduction r = fma(k, -LN2_HI, x) then fma(k, -LN2_LO, r),
// Horner/fma evaluation of the degree-13 Taylor polynomial, and a
// 2^k exponent-field scale. |r| <= ln2/2 keeps the truncation error below
// one ulp of the result.

namespace uvol::simd::detail {

inline constexpr double kExpSat = 700.0;           // saturation bound
inline constexpr double kLog2E = 1.4426950408889634073599246810019;
inline constexpr double kLn2Hi = 6.93147180369123816490e-01;  // top bits of ln 2
inline constexpr double kLn2Lo = 1.90821492927058770002e-10;  // ln 2 - kLn2Hi

// 1/k! for k = 13 .. 2 (Horner order), then the linear and constant terms.
inline constexpr double kExpPoly[] = {
    1.6059043836821614599e-10,  // 1/13!
    2.0876756987868098979e-9,   // 1/12!
    2.5052108385441718775e-8,   // 1/11!
    2.7557319223985890653e-7,   // 1/10!
    2.7557319223985892511e-6,   // 1/9!
    2.4801587301587301566e-5,   // 1/8!
    1.9841269841269841253e-4,   // 1/7!
    1.3888888888888889419e-3,   // 1/6!
    8.3333333333333332177e-3,   // 1/5!
    4.1666666666666664354e-2,   // 1/4!
    1.6666666666666665741e-1,   // 1/3!
    5.0e-1,                     // 1/2!
};

} // namespace uvol::simd::detail
