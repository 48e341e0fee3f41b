#pragma once

#include <cmath>
#include <cstdint>

namespace uvol {

// Philox4x32-10 counter-based generator. A draw is addressed by
// (seed, path_id, step), so any path of any batch is reproducible in
// isolation and path streams can be partitioned across workers freely.
namespace philox {

struct Block {
    std::uint32_t v[4];
};

inline void round_once(std::uint32_t* ctr, const std::uint32_t* key) {
    constexpr std::uint64_t M0 = 0xD2511F53ull;
    constexpr std::uint64_t M1 = 0xCD9E8D57ull;
    const std::uint64_t p0 = M0 * ctr[0];
    const std::uint64_t p1 = M1 * ctr[2];
    const std::uint32_t c0 = static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0];
    const std::uint32_t c1 = static_cast<std::uint32_t>(p1);
    const std::uint32_t c2 = static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1];
    const std::uint32_t c3 = static_cast<std::uint32_t>(p0);
    ctr[0] = c0;
    ctr[1] = c1;
    ctr[2] = c2;
    ctr[3] = c3;
}

inline Block generate(std::uint64_t seed, std::uint64_t path_id,
                      std::uint64_t step) {
    std::uint32_t ctr[4] = {
        static_cast<std::uint32_t>(step),
        static_cast<std::uint32_t>(step >> 32),
        static_cast<std::uint32_t>(path_id),
        static_cast<std::uint32_t>(path_id >> 32),
    };
    std::uint32_t key[2] = {static_cast<std::uint32_t>(seed),
                            static_cast<std::uint32_t>(seed >> 32)};
    constexpr std::uint32_t W0 = 0x9E3779B9u;
    constexpr std::uint32_t W1 = 0xBB67AE85u;
    for (int i = 0; i < 10; ++i) {
        round_once(ctr, key);
        key[0] += W0;
        key[1] += W1;
    }
    return Block{{ctr[0], ctr[1], ctr[2], ctr[3]}};
}

} // namespace philox

// Uniform in (0, 1]: 53 random bits shifted into the mantissa, +1 so that
// log() is always finite.
inline double uniform_open(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits =
        (static_cast<std::uint64_t>(hi) << 32) | lo;
    return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

// One standard normal per (seed, path, step), Box-Muller cosine branch.
inline double normal_draw(std::uint64_t seed, std::uint64_t path_id,
                          std::uint64_t step) {
    const philox::Block b = philox::generate(seed, path_id, step);
    const double u1 = uniform_open(b.v[0], b.v[1]);
    const double u2 = uniform_open(b.v[2], b.v[3]);
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * M_PI * u2);
}

} // namespace uvol
