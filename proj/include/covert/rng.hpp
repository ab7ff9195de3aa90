// SPDX-License-Identifier: Apache-2.0
#pragma once

// Counter-based random number generation (Philox4x32-10). Every draw is a pure
// function of (seed, stream, a, b), so Monte Carlo trials can be generated in
// any order, on any number of workers, with bit-identical results.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace covert::rng {

namespace detail {

inline constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
inline constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
inline constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

}  // namespace detail

/// One 128-bit Philox4x32-10 block for counter (a, b) under a 64-bit key.
inline std::array<std::uint32_t, 4> philox_block(std::uint64_t key, std::uint64_t a, std::uint64_t b) {
    std::uint32_t c0 = static_cast<std::uint32_t>(a);
    std::uint32_t c1 = static_cast<std::uint32_t>(a >> 32);
    std::uint32_t c2 = static_cast<std::uint32_t>(b);
    std::uint32_t c3 = static_cast<std::uint32_t>(b >> 32);
    std::uint32_t k0 = static_cast<std::uint32_t>(key);
    std::uint32_t k1 = static_cast<std::uint32_t>(key >> 32);
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(detail::kPhiloxM0) * c0;
        const std::uint64_t p1 = static_cast<std::uint64_t>(detail::kPhiloxM1) * c2;
        const std::uint32_t n0 = static_cast<std::uint32_t>(p1 >> 32) ^ c1 ^ k0;
        const std::uint32_t n1 = static_cast<std::uint32_t>(p1);
        const std::uint32_t n2 = static_cast<std::uint32_t>(p0 >> 32) ^ c3 ^ k1;
        const std::uint32_t n3 = static_cast<std::uint32_t>(p0);
        c0 = n0;
        c1 = n1;
        c2 = n2;
        c3 = n3;
        k0 += detail::kPhiloxW0;
        k1 += detail::kPhiloxW1;
    }
    return {c0, c1, c2, c3};
}

/// Stream identifiers keep independent uses of the same seed decorrelated.
enum class Stream : std::uint64_t {
    codebook = 1,
    channel_coeff = 2,
    channel_wave = 3,
    message = 4,
    bank_p = 5,
    bank_q = 6,
    bank_r = 7,
    subsample = 8,
    generic = 9,
};

/// Derives the Philox key for (seed, stream).
inline std::uint64_t stream_key(std::uint64_t seed, Stream stream) {
    return detail::splitmix64(seed + 0x632BE59BD9B4E019ull * static_cast<std::uint64_t>(stream));
}

/// Uniform in (0, 1], 53-bit resolution, from two 32-bit words.
inline double u01(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t v = (static_cast<std::uint64_t>(hi) << 32) | lo;
    return (static_cast<double>(v >> 11) + 1.0) * 0x1.0p-53;
}

/// Two iid standard normals from counter (a, b) via Box-Muller.
inline std::array<double, 2> normal_pair(std::uint64_t key, std::uint64_t a, std::uint64_t b) {
    const auto w = philox_block(key, a, b);
    const double u1 = u01(w[0], w[1]);
    const double u2 = u01(w[2], w[3]);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double th = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(th), r * std::sin(th)};
}

/// One standard normal; discards the partner draw.
inline double normal(std::uint64_t key, std::uint64_t a, std::uint64_t b) {
    return normal_pair(key, a, b)[0];
}

/// Uniform in (0, 1].
inline double uniform(std::uint64_t key, std::uint64_t a, std::uint64_t b) {
    const auto w = philox_block(key, a, b);
    return u01(w[0], w[1]);
}

/// Uniform integer in [0, bound) by 64-bit multiply-shift.
inline std::uint64_t uniform_index(std::uint64_t key, std::uint64_t a, std::uint64_t b, std::uint64_t bound) {
    const auto w = philox_block(key, a, b);
    const std::uint64_t v = (static_cast<std::uint64_t>(w[0]) << 32) | w[1];
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(v) * bound) >> 64);
}

}  // namespace covert::rng
