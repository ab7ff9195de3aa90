// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "covert/rng.hpp"
#include "covert/rrc.hpp"

using namespace covert;

namespace {

// Oracle: numerical Fourier transform of the time-domain pulse (phi is even).
double ft_oracle(const RrcPulse& p, double f, double tol = 1e-12) {
    const double bp[] = {p.flat_edge()};
    return 2.0 * quad_or_throw(
                     [&](double t) { return p.time(t) * std::cos(2.0 * std::numbers::pi * f * t); },
                     0.0, p.half_support(), {tol, 40000}, bp);
}

double parseval_freq_energy(const RrcPulse& p, double tol = 1e-9) {
    const double f_max = p.tail_cutoff(tol);
    const double v = 2.0 * quad_or_throw([&](double f) { const double s = p.freq(f); return s * s; },
                                         0.0, f_max, {tol, 40000});
    return v + p.tail_energy(f_max);
}

}  // namespace

TEST_CASE("time-domain branch values") {
    REQUIRE(RrcPulse(1.0, 0.0).time(0.0) == Catch::Approx(1.0).epsilon(1e-15));
    REQUIRE(RrcPulse(1.0, 0.5).time(0.75) == 0.0);                   // outside the support
    REQUIRE(RrcPulse(1.0, 1.0).time(0.5) == Catch::Approx(0.0).margin(1e-7));  // cosine branch hits zero
    // flat branch height sqrt((1+beta)/t0)
    REQUIRE(RrcPulse(2.0, 0.5).time(0.1) == Catch::Approx(std::sqrt(1.5 / 2.0)).epsilon(1e-15));
}

TEST_CASE("the two time-domain branches agree at the boundary") {
    for (double beta : {0.25, 0.5, 0.75, 1.0}) {
        const RrcPulse p(1.3, beta);
        const double t1 = p.flat_edge();
        const double inside = p.time(std::nextafter(t1, 0.0));
        const double outside = p.time(std::nextafter(t1, 1e9));
        REQUIRE(inside == Catch::Approx(std::sqrt((1.0 + beta) / p.t0)).epsilon(1e-12));
        REQUIRE(outside == Catch::Approx(inside).epsilon(1e-7));
    }
}

TEST_CASE("even symmetry in time and frequency") {
    const std::uint64_t key = rng::stream_key(11, rng::Stream::generic);
    for (int i = 0; i < 200; ++i) {
        const double t0 = 0.25 + 4.0 * rng::uniform(key, i, 0);
        const double beta = rng::uniform(key, i, 1);
        const double t = (rng::uniform(key, i, 2) - 0.5) * 2.0 * t0;
        const double f = (rng::uniform(key, i, 3) - 0.5) * 12.0 / t0;
        const RrcPulse p(t0, beta);
        REQUIRE(p.time(t) == p.time(-t));
        REQUIRE(p.freq(f) == p.freq(-f));
    }
}

TEST_CASE("time and frequency scaling relations") {
    const std::uint64_t key = rng::stream_key(12, rng::Stream::generic);
    for (int i = 0; i < 100; ++i) {
        const double t0 = 0.5 + 2.0 * rng::uniform(key, i, 0);
        const double beta = rng::uniform(key, i, 1);
        const double c = 0.3 + 3.0 * rng::uniform(key, i, 2);
        const double t = (rng::uniform(key, i, 3) - 0.5) * c * t0;
        const double f = (rng::uniform(key, i, 4) - 0.5) * 8.0 / t0;
        const RrcPulse base(t0, beta), scaled(c * t0, beta);
        REQUIRE(scaled.time(t) == Catch::Approx(base.time(t / c) / std::sqrt(c)).margin(1e-10));
        REQUIRE(scaled.freq(f) == Catch::Approx(std::sqrt(c) * base.freq(c * f)).margin(1e-10));
    }
}

TEST_CASE("unit energy in the time domain") {
    for (double beta : {0.0, 0.1, 0.25, 0.5, 0.9, 1.0}) {
        for (double t0 : {0.2, 1.0, 7.5}) {
            REQUIRE(RrcPulse(t0, beta).time_energy() == Catch::Approx(1.0).epsilon(1e-10));
        }
    }
}

TEST_CASE("Parseval: unit energy in the frequency domain") {
    for (double beta : {0.0, 0.25, 0.5, 1.0}) {
        for (double t0 : {0.5, 1.0, 3.0}) {
            REQUIRE(parseval_freq_energy(RrcPulse(t0, beta)) == Catch::Approx(1.0).margin(1e-8));
        }
    }
}

TEST_CASE("spectrum matches the numerical Fourier transform of the pulse") {
    for (double beta : {0.0, 0.25, 0.5, 1.0}) {
        const RrcPulse p(1.0, beta);
        for (int i = 0; i < 100; ++i) {
            const double f = -6.0 + 12.0 * i / 99.0;
            REQUIRE(p.freq(f) == Catch::Approx(ft_oracle(p, f)).margin(1e-6));
        }
    }
}

TEST_CASE("spectrum peak value at f = 0") {
    // Closed form of the continuous limit: sqrt(t0) (4 beta + (1-beta) pi) / (pi sqrt(1+beta)).
    for (double beta : {0.0, 0.3, 0.5, 1.0}) {
        const RrcPulse p(1.0, beta);
        const double expect = (4.0 * beta + (1.0 - beta) * std::numbers::pi) /
                              (std::numbers::pi * std::sqrt(1.0 + beta));
        REQUIRE(p.freq(0.0) == Catch::Approx(expect).epsilon(1e-12));
        REQUIRE(p.freq(0.0) == Catch::Approx(ft_oracle(p, 0.0)).epsilon(1e-9));
    }
    // beta = 1, t0 = 1: analytic value 2*sqrt(2)/pi.
    REQUIRE(RrcPulse(1.0, 1.0).freq(0.0) ==
            Catch::Approx(2.0 * std::numbers::sqrt2 / std::numbers::pi).epsilon(1e-13));
}

TEST_CASE("removable pole is evaluated to the limit") {
    for (double beta : {0.2, 0.5, 0.75, 1.0}) {
        const RrcPulse p(1.0, beta);
        const double f_pole = (1.0 + beta) / (4.0 * beta * p.t0);
        const double at_pole = p.freq(f_pole);
        REQUIRE(std::isfinite(at_pole));
        // One-sided limits, sampled just outside the series window.
        const double h = 1.5e-6 * f_pole;
        REQUIRE(p.freq(f_pole - h) == Catch::Approx(at_pole).margin(1e-8));
        REQUIRE(p.freq(f_pole + h) == Catch::Approx(at_pole).margin(1e-8));
        REQUIRE(at_pole == Catch::Approx(ft_oracle(p, f_pole)).margin(1e-8));
    }
}

TEST_CASE("tail bound really bounds the spectrum") {
    for (double beta : {0.0, 0.5, 1.0}) {
        const RrcPulse p(1.0, beta);
        const double f0 = p.envelope_valid_from();
        for (int i = 1; i <= 50; ++i) {
            const double f = f0 * (1.0 + 0.35 * i);
            const double s = p.freq(f);
            REQUIRE(s * s <= p.freq_sq_envelope(f) * (1.0 + 1e-12));
        }
        if (beta > 0.0) {
            const double f_cut = p.tail_cutoff(1e-9);
            REQUIRE(0.5 * p.tail_energy_bound(f_cut) <= 1e-9);
        }
    }
}

TEST_CASE("gram matrix of the shifted basis is the identity") {
    const ShiftedBasis basis(RrcPulse(0.8, 0.5), 3);
    const auto gram = basis_gram(basis, 1e-12);
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            REQUIRE(gram[i][j] == Catch::Approx(i == j ? 1.0 : 0.0).margin(1e-8));
        }
    }
    const auto one = basis_gram(ShiftedBasis(RrcPulse(1.0, 0.25), 1), 1e-12);
    REQUIRE(one[0][0] == Catch::Approx(1.0).margin(1e-10));
}

TEST_CASE("artificially overlapped pulses are not orthogonal") {
    const RrcPulse p(1.0, 0.5);
    const auto gram = basis_gram(p, 2, 1e-12, p.t0 / 2.0);
    REQUIRE(std::abs(gram[0][1]) > 0.01);
}

TEST_CASE("constructor validates parameters") {
    REQUIRE_THROWS_AS(RrcPulse(0.0, 0.5), ConfigError);
    REQUIRE_THROWS_AS(RrcPulse(1.0, -0.1), ConfigError);
    REQUIRE_THROWS_AS(RrcPulse(1.0, 1.5), ConfigError);
}
