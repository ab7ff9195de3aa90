// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <set>

#include "covert/rng.hpp"

using namespace covert;

TEST_CASE("philox is deterministic and counter-sensitive") {
    const auto a = rng::philox_block(42, 7, 9);
    const auto b = rng::philox_block(42, 7, 9);
    REQUIRE(a == b);
    REQUIRE(a != rng::philox_block(42, 7, 10));
    REQUIRE(a != rng::philox_block(42, 8, 9));
    REQUIRE(a != rng::philox_block(43, 7, 9));
}

TEST_CASE("philox reference vector") {
    // Philox4x32-10 with counter = 0, key = 0 (Random123 test vector).
    const auto w = rng::philox_block(0, 0, 0);
    REQUIRE(w[0] == 0x6627e8d5u);
    REQUIRE(w[1] == 0xe169c58du);
    REQUIRE(w[2] == 0xbc57ac4cu);
    REQUIRE(w[3] == 0x9b00dbd8u);
}

TEST_CASE("uniforms land in (0,1] and look uniform") {
    const std::uint64_t key = rng::stream_key(1, rng::Stream::generic);
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double u = rng::uniform(key, i, 0);
        REQUIRE(u > 0.0);
        REQUIRE(u <= 1.0);
        sum += u;
    }
    // mean of U(0,1]: 1/2 within 5 sigma = 5/sqrt(12 n)
    REQUIRE(std::abs(sum / n - 0.5) < 5.0 / std::sqrt(12.0 * n));
}

TEST_CASE("normals have the right first moments") {
    const std::uint64_t key = rng::stream_key(3, rng::Stream::generic);
    const int n = 200000;
    double s1 = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto p = rng::normal_pair(key, i, 0);
        s1 += p[0] + p[1];
        s2 += p[0] * p[0] + p[1] * p[1];
    }
    const double mean = s1 / (2.0 * n);
    const double var = s2 / (2.0 * n) - mean * mean;
    REQUIRE(std::abs(mean) < 5.0 / std::sqrt(2.0 * n));
    REQUIRE(std::abs(var - 1.0) < 5.0 * std::sqrt(2.0 / (2.0 * n)));
}

TEST_CASE("uniform_index is unbiased across small bound") {
    const std::uint64_t key = rng::stream_key(9, rng::Stream::message);
    int counts[7] = {0};
    const int n = 70000;
    for (int i = 0; i < n; ++i) counts[rng::uniform_index(key, i, 1, 7)]++;
    for (int c : counts) REQUIRE(std::abs(c - n / 7) < 5 * std::sqrt(n / 7.0));
}

TEST_CASE("streams decorrelate the same counters") {
    const std::uint64_t k1 = rng::stream_key(5, rng::Stream::bank_p);
    const std::uint64_t k2 = rng::stream_key(5, rng::Stream::bank_q);
    REQUIRE(k1 != k2);
    REQUIRE(rng::philox_block(k1, 0, 0) != rng::philox_block(k2, 0, 0));
}
