// SPDX-License-Identifier: Apache-2.0
#pragma once

// AWGN simulation. The coefficient path is exact: it draws the matched-filter
// outputs directly from their distribution, which is the statistic every
// covertness and reliability quantity is defined on. The waveform path exists
// to demonstrate the matched-filter reduction and carries the documented
// discretization bias of sampled band-limited noise.

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "covert/errors.hpp"
#include "covert/rng.hpp"
#include "covert/rrc.hpp"

namespace covert {

struct AwgnSpec {
    double intensity = 1.0;  // N; per-coefficient variance is N/2
    std::uint64_t seed = 0;

    void validate() const {
        if (!(intensity > 0.0)) throw ConfigError("AwgnSpec: intensity must be positive");
    }
};

/// z_i = x_i + w_i, w_i iid Normal(0, N/2) from stream (seed, trial, i).
inline std::vector<double> transmit_coeff(std::span<const double> x, const AwgnSpec& spec,
                                          std::uint64_t trial) {
    spec.validate();
    const std::uint64_t key = rng::stream_key(spec.seed, rng::Stream::channel_coeff);
    const double sigma = std::sqrt(spec.intensity / 2.0);
    std::vector<double> z(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        z[i] = x[i] + sigma * rng::normal(key, trial, i);
    }
    return z;
}

/// Noise-only coefficients (the Lambda = 0 channel output).
inline std::vector<double> noise_coeff(std::size_t n, const AwgnSpec& spec, std::uint64_t trial) {
    spec.validate();
    const std::uint64_t key = rng::stream_key(spec.seed, rng::Stream::channel_coeff);
    const double sigma = std::sqrt(spec.intensity / 2.0);
    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = sigma * rng::normal(key, trial, i);
    return z;
}

struct WaveformSim {
    double sample_rate = 0.0;  // Hz
    double duration = 0.0;     // seconds
    // The noise surrogate is iid Gaussian samples, i.e. flat PSD N/2 over the
    // full Nyquist band, so the effective noise bandwidth is sample_rate/2.
    double noise_bandwidth() const { return sample_rate / 2.0; }

    void validate(const RrcPulse& pulse) const {
        if (!(sample_rate > 0.0) || !(duration > 0.0)) {
            throw ConfigError("WaveformSim: sample_rate and duration must be positive");
        }
        const double extent = pulse.tail_cutoff(1e-3);
        if (sample_rate < 8.0 * extent) {
            throw ConfigError("WaveformSim: sample_rate must be at least 8x the pulse spectral extent (" +
                              std::to_string(8.0 * extent) + " Hz)");
        }
    }
};

/// Sampled signal sum_i x_i g_i(t) plus the band-limited white-noise
/// surrogate: per-sample variance N*f_s/2, fixed so that inner products with
/// unit-energy functions have variance N/2.
inline std::vector<double> transmit_waveform(std::span<const double> x, const RrcPulse& pulse,
                                             const WaveformSim& sim, const AwgnSpec& spec,
                                             std::uint64_t trial) {
    sim.validate(pulse);
    spec.validate();
    std::vector<double> out = to_waveform(x, pulse, sim.sample_rate);
    const std::size_t samples = static_cast<std::size_t>(std::llround(sim.duration * sim.sample_rate)) + 1;
    out.resize(samples, 0.0);
    const std::uint64_t key = rng::stream_key(spec.seed, rng::Stream::channel_wave);
    const double sigma = std::sqrt(spec.intensity * sim.sample_rate / 2.0);
    for (std::size_t kk = 0; kk < samples; ++kk) {
        out[kk] += sigma * rng::normal(key, trial, kk);
    }
    return out;
}

/// Matched filter: y_i = int signal * g_i dt by the trapezoid rule on the
/// sample grid over the support [(i-1) t0, i t0].
inline std::vector<double> matched_filter(std::span<const double> signal, const RrcPulse& pulse,
                                          std::int64_t n, double sample_rate) {
    if (n < 1 || sample_rate <= 0.0) throw ConfigError("matched_filter: bad arguments");
    const double dt = 1.0 / sample_rate;
    std::vector<double> y(static_cast<std::size_t>(n), 0.0);
    for (std::int64_t i = 0; i < n; ++i) {
        const double lo = static_cast<double>(i) * pulse.t0;
        const double hi = lo + pulse.t0;
        const auto k0 = static_cast<std::int64_t>(std::ceil(lo * sample_rate - 1e-9));
        const auto k1 = std::min<std::int64_t>(static_cast<std::int64_t>(std::floor(hi * sample_rate + 1e-9)),
                                               static_cast<std::int64_t>(signal.size()) - 1);
        double acc = 0.0;
        for (std::int64_t kk = k0; kk <= k1; ++kk) {
            const double t = static_cast<double>(kk) * dt;
            const double w = (kk == k0 || kk == k1) ? 0.5 : 1.0;
            acc += w * signal[static_cast<std::size_t>(kk)] * pulse.time(t - (i + 0.5) * pulse.t0);
        }
        y[static_cast<std::size_t>(i)] = acc * dt;
    }
    return y;
}

}  // namespace covert
