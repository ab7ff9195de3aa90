// SPDX-License-Identifier: Apache-2.0
#pragma once

// Monte Carlo reliability runner: per-sub-code message-error frequencies with
// messages uniform, plus the false-activity frequency under silence. The
// max-average probability of error is the max of the former plus the latter.

#include <cstdint>
#include <mutex>
#include <vector>

#include "covert/channel.hpp"
#include "covert/parallel.hpp"
#include "covert/scheme.hpp"

namespace covert {

struct ErrorRates {
    std::vector<double> per_subcode;
    std::vector<double> per_subcode_se;
    double max_subcode_err = 0.0;
    double false_activity = 0.0;
    double false_activity_se = 0.0;
    double p_err = 0.0;  // max_s per-sub-code error + false activity
    std::uint64_t trials_per_subcode = 0;
    std::uint64_t trials_silent = 0;
};

/// `trials` active decodes are split evenly across sub-codes (at least one
/// each), and the same number of silent trials estimates false activity.
inline ErrorRates measure_error_rates(const Codebook& cb, const SchemeParams& params,
                                      const AwgnSpec& channel, std::uint64_t trials,
                                      std::uint64_t seed) {
    if (trials < 1) throw ConfigError("measure_error_rates: trials must be >= 1");
    const std::uint64_t per_s = std::max<std::uint64_t>(1, trials / cb.k);
    const std::uint64_t active_total = per_s * cb.k;
    const std::uint64_t msg_key = rng::stream_key(seed, rng::Stream::message);

    std::vector<std::uint64_t> err_counts(cb.k, 0);
    std::uint64_t fa_count = 0;
    std::mutex merge_mutex;

    parallel_for(active_total, [&](std::uint64_t b, std::uint64_t e) {
        std::vector<std::uint64_t> local(cb.k, 0);
        std::vector<double> x(static_cast<std::size_t>(cb.n));
        for (std::uint64_t t = b; t < e; ++t) {
            const std::uint64_t s = t / per_s + 1;
            const std::uint64_t msg = rng::uniform_index(msg_key, s, t % per_s, cb.m) + 1;
            const std::uint64_t row = cb.row_index(msg, s);
            for (std::int64_t i = 0; i < cb.n; ++i) x[static_cast<std::size_t>(i)] = cb.value(row, i);
            const auto y = transmit_coeff(x, channel, t);
            const auto out = decode(cb, s, y, params);
            if (out.status != DecodeOutcome::Status::decoded || out.m_hat != msg) ++local[s - 1];
        }
        const std::lock_guard<std::mutex> lock(merge_mutex);
        for (std::uint64_t s = 0; s < cb.k; ++s) err_counts[s] += local[s];
    });

    parallel_for(active_total, [&](std::uint64_t b, std::uint64_t e) {
        std::uint64_t local = 0;
        for (std::uint64_t t = b; t < e; ++t) {
            const std::uint64_t s = t % cb.k + 1;
            const auto y = noise_coeff(static_cast<std::size_t>(cb.n), channel, active_total + t);
            const auto out = decode(cb, s, y, params);
            if (out.status != DecodeOutcome::Status::silent) ++local;
        }
        const std::lock_guard<std::mutex> lock(merge_mutex);
        fa_count += local;
    });

    ErrorRates r;
    r.trials_per_subcode = per_s;
    r.trials_silent = active_total;
    r.per_subcode.resize(cb.k);
    r.per_subcode_se.resize(cb.k);
    for (std::uint64_t s = 0; s < cb.k; ++s) {
        const double p = static_cast<double>(err_counts[s]) / static_cast<double>(per_s);
        r.per_subcode[s] = p;
        r.per_subcode_se[s] = std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(per_s));
        r.max_subcode_err = std::max(r.max_subcode_err, p);
    }
    r.false_activity = static_cast<double>(fa_count) / static_cast<double>(active_total);
    r.false_activity_se = std::sqrt(std::max(r.false_activity * (1.0 - r.false_activity), 0.0) /
                                    static_cast<double>(active_total));
    r.p_err = r.max_subcode_err + r.false_activity;
    return r;
}

}  // namespace covert
