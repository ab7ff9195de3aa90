// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <numeric>
#include <set>

#include "covert/channel.hpp"
#include "covert/normal.hpp"
#include "covert/reliability.hpp"
#include "covert/scheme.hpp"

using namespace covert;

TEST_CASE("derive_params frozen values") {
    // tv, n = 1e4, delta = 0.9, N_w = 1: (2/n)^{1/4} sqrt(Qinv(0.05)) (1 - n^{-1/8})
    const auto tv = derive_params(10000, 1.0, 1.0, 0.9, Metric::tv);
    const double qinv = 1.6448536269514722;
    const double a_tv = std::pow(2.0 / 1e4, 0.25) * std::sqrt(qinv) * (1.0 - std::pow(1e4, -0.125));
    REQUIRE(tv.a_n == Catch::Approx(a_tv).epsilon(1e-12));
    REQUIRE(tv.a_n == Catch::Approx(0.1043).margin(5e-5));

    // kl, n = 1e4, delta = 0.25, N_w = 2: (0.25 * 4 / 1e4)^{1/4} (1 - n^{-1/9})
    const auto kl = derive_params(10000, 2.0, 1.0, 0.25, Metric::kl);
    const double a_kl = std::pow(1e-4, 0.25) * (1.0 - std::pow(10.0, -4.0 / 9.0));
    REQUIRE(kl.a_n == Catch::Approx(a_kl).epsilon(1e-12));
}

TEST_CASE("key rate vanishes relative to message rate when N_w = N_b") {
    double prev_ratio = 1e9;
    for (std::int64_t n : {100, 10000, 1000000, 100000000}) {
        const auto p = derive_params(n, 1.0, 1.0, 0.5, Metric::tv);
        const double expect_log_k = (2.0 / std::log(static_cast<double>(n))) * p.a_n * p.a_n *
                                    static_cast<double>(n);
        REQUIRE(p.log_k == Catch::Approx(expect_log_k).epsilon(1e-12));
        REQUIRE(p.log_k > 0.0);
        const double ratio = p.log_k / p.log_m;
        REQUIRE(ratio < prev_ratio);
        prev_ratio = ratio;
    }
    REQUIRE(prev_ratio < 0.12);  // 2/ln(1e8) / (1 - 1/ln(1e8)) ~ 0.115
}

TEST_CASE("key size clamps to zero when Willie is noisy enough") {
    const auto p = derive_params(1000, 4.0, 1.0, 0.5, Metric::tv);
    REQUIRE(p.log_k == 0.0);
    REQUIRE(p.k == 1);
}

TEST_CASE("params scale consistently in the noise pair") {
    for (double c : {0.5, 1.0, 2.0, 5.0, 11.0}) {
        const auto base = derive_params(4096, 1.0, 0.5, 0.7, Metric::tv);
        const auto scaled = derive_params(4096, c * 1.0, c * 0.5, 0.7, Metric::tv);
        REQUIRE(scaled.a_n * scaled.a_n == Catch::Approx(c * base.a_n * base.a_n).epsilon(1e-12));
        REQUIRE(scaled.log_m == Catch::Approx(base.log_m).epsilon(1e-12));
        REQUIRE(scaled.log_k == Catch::Approx(base.log_k).epsilon(1e-12));
        const auto kb = derive_params(4096, c * 1.0, c * 0.5, 0.7, Metric::kl);
        const auto kb0 = derive_params(4096, 1.0, 0.5, 0.7, Metric::kl);
        REQUIRE(kb.a_n * kb.a_n == Catch::Approx(c * kb0.a_n * kb0.a_n).epsilon(1e-12));
        REQUIRE(kb.log_m == Catch::Approx(kb0.log_m).epsilon(1e-12));
    }
}

TEST_CASE("derive_params validates inputs and flags overflow") {
    REQUIRE_THROWS_AS(derive_params(2, 1.0, 1.0, 0.5, Metric::tv), ConfigError);
    REQUIRE_THROWS_AS(derive_params(100, 1.0, 1.0, 0.0, Metric::tv), ConfigError);
    REQUIRE_THROWS_AS(derive_params(100, 1.0, 1.0, 1.0, Metric::tv), ConfigError);
    REQUIRE_THROWS_AS(derive_params(100, -1.0, 1.0, 0.5, Metric::tv), ConfigError);

    const auto p = derive_params(100000000, 1.0, 0.01, 0.9, Metric::tv);
    REQUIRE(p.overflow_m);
    REQUIRE(p.m == (std::uint64_t{1} << 62));
}

TEST_CASE("codebook generation is deterministic and seed-sensitive") {
    const auto a = Codebook::generate(64, 0.1, 16, 4, 7);
    const auto b = Codebook::generate(64, 0.1, 16, 4, 7);
    const auto c = Codebook::generate(64, 0.1, 16, 4, 8);
    REQUIRE(a.bits == b.bits);
    REQUIRE(a.bits != c.bits);
}

TEST_CASE("codebook columns are sign-balanced") {
    int bad_books = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto cb = Codebook::generate(16, 1.0, 256, 16, seed);  // MK = 4096
        bool ok = true;
        for (std::int64_t i = 0; i < cb.n; ++i) {
            double s = 0.0;
            for (std::uint64_t r = 0; r < cb.rows(); ++r) s += cb.sign(r, i);
            ok = ok && std::abs(s / static_cast<double>(cb.rows())) <= 4.0 / 64.0;
        }
        if (!ok) ++bad_books;
    }
    // binomial oracle: P(|mean| > 4/sqrt(MK)) ~ 6e-5 per column, 16 columns, 20 seeds
    REQUIRE(bad_books <= 1);
}

TEST_CASE("enumeration emits each sign pattern exactly once") {
    const auto cb = Codebook::enumerate_all(12, 0.5);
    REQUIRE(cb.rows() == 4096);
    std::set<std::uint64_t> seen;
    for (std::uint64_t r = 0; r < cb.rows(); ++r) {
        std::uint64_t pat = 0;
        for (std::int64_t i = 0; i < cb.n; ++i) {
            if (cb.sign(r, i) > 0) pat |= std::uint64_t{1} << i;
        }
        seen.insert(pat);
    }
    REQUIRE(seen.size() == 4096);
}

TEST_CASE("generation budget is enforced") {
    REQUIRE_THROWS_AS(Codebook::generate(1 << 20, 1.0, 1 << 20, 1 << 4, 0), BudgetExceeded);
}

TEST_CASE("encode looks rows up and validates indices") {
    const auto cb = Codebook::generate(8, 0.25, 4, 3, 1);
    const auto x = encode(cb, 2, 3);
    REQUIRE(x.size() == 8);
    for (std::int64_t i = 0; i < 8; ++i) {
        REQUIRE(x[static_cast<std::size_t>(i)] == cb.value(cb.row_index(2, 3), i));
        REQUIRE(std::abs(x[static_cast<std::size_t>(i)]) == 0.25);
    }
    REQUIRE_THROWS_AS(encode(cb, 5, 1), ConfigError);
    REQUIRE_THROWS_AS(encode(cb, 1, 4), ConfigError);
    REQUIRE_THROWS_AS(encode(cb, 0, 1), ConfigError);
}

TEST_CASE("waveform hits x_i phi(0) at pulse centers and is zero when silent") {
    const RrcPulse pulse(0.5, 0.5);
    const auto cb = Codebook::generate(6, 0.3, 4, 2, 3);
    const auto x = encode(cb, 1, 2);
    const double fs = 64.0 / pulse.t0;
    const auto w = to_waveform(x, pulse, fs);
    for (std::int64_t i = 0; i < 6; ++i) {
        const auto k = static_cast<std::size_t>(std::llround((i + 0.5) * pulse.t0 * fs));
        REQUIRE(w[k] == Catch::Approx(x[static_cast<std::size_t>(i)] * pulse.time(0.0)).epsilon(1e-12));
    }
    const std::vector<double> zero(6, 0.0);
    for (double v : to_waveform(zero, pulse, fs)) REQUIRE(v == 0.0);
}

TEST_CASE("waveform energy equals a^2 n") {
    const RrcPulse pulse(1.0, 0.5);
    const auto cb = Codebook::generate(8, 0.7, 2, 2, 9);
    const auto x = encode(cb, 1, 1);
    const double fs = 512.0;
    const auto w = to_waveform(x, pulse, fs);
    double e = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
        const double wt = (k == 0 || k + 1 == w.size()) ? 0.5 : 1.0;
        e += wt * w[k] * w[k];
    }
    e /= fs;
    REQUIRE(e == Catch::Approx(0.7 * 0.7 * 8.0).margin(1e-4));
}

TEST_CASE("decoder statistic equals the explicit log-likelihood ratio") {
    const auto cb = Codebook::generate(32, 0.2, 8, 4, 5);
    const double nb = 0.8;
    const std::uint64_t key = rng::stream_key(77, rng::Stream::generic);
    for (std::uint64_t row = 0; row < cb.rows(); row += 7) {
        std::vector<double> y(32);
        for (int i = 0; i < 32; ++i) y[static_cast<std::size_t>(i)] = 2.0 * rng::normal(key, row, i);
        double direct = 0.0;
        for (std::int64_t i = 0; i < 32; ++i) {
            const double x = cb.value(row, i);
            const double yy = y[static_cast<std::size_t>(i)];
            // log W(y|x)/P0(y) = (2xy - x^2)/N_b for Gaussian W with variance N_b/2
            direct += (2.0 * x * yy - x * x) / nb;
        }
        REQUIRE(decode_statistic(cb, row, y, nb) == Catch::Approx(direct).margin(1e-9));
    }
}

TEST_CASE("decode: noiseless decodes, silence stays silent, floods error out") {
    const auto params = derive_params(64, 1.0, 1.0, 0.9, Metric::tv);
    const auto cb = Codebook::generate(64, params.a_n, params.m, params.k, 21);

    const auto x = encode(cb, 3, 2);
    const auto hit = decode(cb, 2, x, params);
    REQUIRE(hit.status == DecodeOutcome::Status::decoded);
    REQUIRE(hit.m_hat == 3);

    const std::vector<double> zero(64, 0.0);
    const auto silent = decode(cb, 1, zero, params);
    REQUIRE(silent.status == DecodeOutcome::Status::silent);
    REQUIRE(silent.m_hat == 0);

    // A huge common offset makes many rows pass the threshold at once.
    std::vector<double> flood(64, 1e6);
    bool saw_error = false;
    for (std::uint64_t s = 1; s <= cb.k && !saw_error; ++s) {
        saw_error = decode(cb, s, flood, params).status == DecodeOutcome::Status::error;
    }
    REQUIRE(saw_error);
}

TEST_CASE("noiseless channel sim has zero measured error") {
    const auto params = derive_params(64, 1.0, 1.0, 0.9, Metric::tv);
    const auto cb = Codebook::generate(64, params.a_n, params.m, params.k, 4);
    const AwgnSpec nearly_off{1e-12, 99};
    const auto rates = measure_error_rates(cb, params, nearly_off, 50, 123);
    REQUIRE(rates.max_subcode_err == 0.0);
    REQUIRE(rates.false_activity == 0.0);
    REQUIRE(rates.p_err == 0.0);
}

TEST_CASE("extreme noise drives the message-error rate toward one") {
    const auto params = derive_params(64, 1.0, 1.0, 0.9, Metric::tv);
    const auto cb = Codebook::generate(64, params.a_n, params.m, params.k, 4);
    const AwgnSpec loud{1e4, 100};
    const auto rates = measure_error_rates(cb, params, loud, 60, 5);
    REQUIRE(rates.max_subcode_err > 0.8);
}

TEST_CASE("estimates agree across disjoint seed ranges") {
    const auto params = derive_params(48, 1.0, 1.0, 0.5, Metric::tv);
    const auto cb = Codebook::generate(48, params.a_n, params.m, params.k, 11);
    const auto r1 = measure_error_rates(cb, params, AwgnSpec{1.0, 1}, 400, 1);
    const auto r2 = measure_error_rates(cb, params, AwgnSpec{1.0, 2}, 400, 2);
    for (std::uint64_t s = 0; s < cb.k; ++s) {
        const double se = std::sqrt(r1.per_subcode_se[s] * r1.per_subcode_se[s] +
                                    r2.per_subcode_se[s] * r2.per_subcode_se[s]);
        REQUIRE(std::abs(r1.per_subcode[s] - r2.per_subcode[s]) <= 3.0 * se + 1e-12);
    }
}

TEST_CASE("codebook binary round-trip is bit exact") {
    const auto cb = Codebook::generate(50, 0.37, 8, 4, 321);
    const auto path = std::filesystem::temp_directory_path() / "covert_cb_test.bin";
    cb.save(path.string());
    const auto back = Codebook::load(path.string());
    REQUIRE(back.n == cb.n);
    REQUIRE(back.m == cb.m);
    REQUIRE(back.k == cb.k);
    REQUIRE(back.a == cb.a);
    REQUIRE(back.bits == cb.bits);
    std::filesystem::remove(path);
}

TEST_CASE("rearrange: worked example with one bad sub-code") {
    const auto cb = Codebook::generate(16, 0.5, 8, 4, 9);  // M = 8, K = 4
    const std::vector<double> err = {0.1, 0.9, 0.2, 0.3};  // sub-code 2 is bad at eps = 1/4
    const auto r = rearrange(cb, err, 0.25);
    REQUIRE(r.k_prime == 2);
    REQUIRE(r.m_prime == 16);  // 2M
    REQUIRE(r.eps_hat == Catch::Approx(1.0));
    // kept sub-codes are the lowest-index good ones: 0 and 2
    REQUIRE(r.kept == std::vector<std::uint64_t>{0, 2});
    // bijection onto all MK rows
    std::set<std::uint64_t> all;
    for (const auto& s : r.slots) all.insert(s.begin(), s.end());
    REQUIRE(all.size() == cb.rows());
    // arithmetic error bound
    REQUIRE(r.max_avg_error(err) <= r.error_bound() + 1e-12);
}

TEST_CASE("rearrange: all good sub-codes with small eps keeps everything") {
    const auto cb = Codebook::generate(8, 0.5, 4, 4, 10);
    const std::vector<double> err = {0.01, 0.02, 0.0, 0.01};
    const auto r = rearrange(cb, err, 0.01);  // sqrt(eps) = 0.1, round(0.9 * 4) = 4
    REQUIRE(r.k_prime == 4);
    REQUIRE(r.m_prime == 4);
    for (std::size_t s = 0; s < r.slots.size(); ++s) REQUIRE(r.slots[s].size() == 4);
}

TEST_CASE("rearrange rejects degenerate inputs") {
    const auto cb = Codebook::generate(8, 0.5, 4, 2, 10);
    REQUIRE_THROWS_AS(rearrange(cb, std::vector<double>{1.0, 1.0}, 0.25), NoGoodSubcode);
    REQUIRE_THROWS_AS(rearrange(cb, std::vector<double>{0.1}, 0.25), ConfigError);
    REQUIRE_THROWS_AS(rearrange(cb, std::vector<double>{0.1, 0.1}, 0.0), ConfigError);
}
