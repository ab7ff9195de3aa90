// SPDX-License-Identifier: Apache-2.0
#pragma once

// Scheme constants and BPSK random codebooks. All rate/amplitude formulas are
// kept as exact reals; message and key counts are materialized integers with
// an overflow flag so analysis can proceed at sizes no codebook could hold.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "covert/errors.hpp"
#include "covert/normal.hpp"
#include "covert/rng.hpp"
#include "covert/rrc.hpp"

namespace covert {

enum class Metric { tv, kl };

inline const char* metric_name(Metric m) { return m == Metric::tv ? "tv" : "kl"; }

inline Metric metric_from_name(const std::string& s) {
    if (s == "tv") return Metric::tv;
    if (s == "kl") return Metric::kl;
    throw ConfigError("metric must be 'tv' or 'kl', got '" + s + "'");
}

struct SchemeParams {
    std::int64_t n = 0;
    double nw = 0.0;
    double nb = 0.0;
    double delta = 0.0;
    Metric metric = Metric::tv;

    double a_n = 0.0;
    double log_m = 0.0;  // nats
    double log_k = 0.0;  // nats
    double gamma = 0.0;  // decoder threshold
    std::uint64_t m = 0;
    std::uint64_t k = 0;
    bool overflow_m = false;  // m (resp. k) saturated at 2^62; analytical use only
    bool overflow_k = false;

    double amplitude_energy() const { return a_n * a_n * static_cast<double>(n); }
};

namespace detail {

inline constexpr std::uint64_t kCountCap = std::uint64_t{1} << 62;

inline std::uint64_t materialize_count(double log_count, bool& overflow) {
    overflow = false;
    if (log_count <= 0.0) return 1;
    if (log_count >= 62.0 * std::numbers::ln2) {
        overflow = true;
        return kCountCap;
    }
    const double c = std::exp(log_count);
    return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(c)));
}

}  // namespace detail

/// Amplitude for the chosen covertness metric at blocklength n (real-valued n
/// is accepted; the mask optimizer's slackness probes need it).
inline double scheme_amplitude(double n, double nw, double delta, Metric metric) {
    if (metric == Metric::tv) {
        return std::pow(2.0 / n, 0.25) * std::sqrt(gauss_q_inv((1.0 - delta) / 2.0) * nw) *
               (1.0 - std::pow(n, -0.125));
    }
    return std::pow(delta * nw * nw / n, 0.25) * (1.0 - std::pow(n, -1.0 / 9.0));
}

/// log M and log K (nats) as functions of a real-valued blocklength.
inline std::pair<double, double> scheme_log_sizes(double n, double nw, double nb, double delta,
                                                  Metric metric) {
    const double a = scheme_amplitude(n, nw, delta, metric);
    const double e = a * a * n;
    const double ln_n = std::log(n);
    const double log_m = (1.0 - 1.0 / ln_n) * e / nb;
    const double log_k = std::max(0.0, (1.0 + 1.0 / ln_n) - (1.0 - 1.0 / ln_n) * nw / nb) * e / nw;
    return {log_m, log_k};
}

inline SchemeParams derive_params(std::int64_t n, double nw, double nb, double delta, Metric metric) {
    if (n < 3) throw ConfigError("derive_params: n must be >= 3");
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("derive_params: delta must lie in (0,1)");
    if (!(nw > 0.0) || !(nb > 0.0)) throw ConfigError("derive_params: noise parameters must be positive");

    SchemeParams p;
    p.n = n;
    p.nw = nw;
    p.nb = nb;
    p.delta = delta;
    p.metric = metric;
    const double nn = static_cast<double>(n);
    p.a_n = scheme_amplitude(nn, nw, delta, metric);
    const auto [log_m, log_k] = scheme_log_sizes(nn, nw, nb, delta, metric);
    p.log_m = log_m;
    p.log_k = log_k;
    p.gamma = (1.0 - std::pow(nn, -0.125)) * p.a_n * p.a_n * nn / nb;
    p.m = detail::materialize_count(p.log_m, p.overflow_m);
    p.k = detail::materialize_count(p.log_k, p.overflow_k);
    return p;
}

/// M*K*n sign bits, packed row-major; row (m,s) sits at (m-1)*K + (s-1), so
/// sub-code s is the row stride-K slice.
struct Codebook {
    std::int64_t n = 0;
    double a = 0.0;
    std::uint64_t m = 0;
    std::uint64_t k = 0;
    std::uint64_t seed = 0;
    std::vector<std::uint64_t> bits;

    static constexpr std::uint64_t kDefaultBitBudget = std::uint64_t{1} << 31;

    std::uint64_t rows() const { return m * k; }
    std::size_t words_per_row() const { return (static_cast<std::size_t>(n) + 63) / 64; }

    int sign(std::uint64_t row, std::int64_t i) const {
        const std::uint64_t w = bits[row * words_per_row() + static_cast<std::size_t>(i >> 6)];
        return ((w >> (i & 63)) & 1) ? 1 : -1;
    }
    double value(std::uint64_t row, std::int64_t i) const { return sign(row, i) * a; }

    std::uint64_t row_index(std::uint64_t msg, std::uint64_t key) const {
        if (msg < 1 || msg > m || key < 1 || key > k) {
            throw ConfigError("codebook index out of range: (m=" + std::to_string(msg) +
                              ", s=" + std::to_string(key) + ")");
        }
        return (msg - 1) * k + (key - 1);
    }

    std::vector<double> codeword(std::uint64_t row) const {
        std::vector<double> x(static_cast<std::size_t>(n));
        for (std::int64_t i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = value(row, i);
        return x;
    }

    /// iid fair sign bits keyed by (seed, row, 128-bit block); bit-identical
    /// across runs, platforms, and worker counts.
    static Codebook generate(std::int64_t n, double amplitude, std::uint64_t m, std::uint64_t k,
                             std::uint64_t seed, std::uint64_t bit_budget = kDefaultBitBudget) {
        if (n < 1 || m < 1 || k < 1) throw ConfigError("Codebook::generate: n, M, K must be positive");
        const double total_bits = static_cast<double>(n) * static_cast<double>(m) * static_cast<double>(k);
        if (total_bits > static_cast<double>(bit_budget)) {
            throw BudgetExceeded("codebook materialization would need " + std::to_string(total_bits) +
                                 " bits (budget " + std::to_string(bit_budget) + ")");
        }
        Codebook cb;
        cb.n = n;
        cb.a = amplitude;
        cb.m = m;
        cb.k = k;
        cb.seed = seed;
        const std::size_t wpr = cb.words_per_row();
        cb.bits.assign(wpr * m * k, 0);
        const std::uint64_t key = rng::stream_key(seed, rng::Stream::codebook);
        for (std::uint64_t row = 0; row < m * k; ++row) {
            for (std::size_t blk = 0; blk * 128 < static_cast<std::size_t>(n); ++blk) {
                const auto wblk = rng::philox_block(key, row, blk);
                const std::uint64_t lo = (static_cast<std::uint64_t>(wblk[1]) << 32) | wblk[0];
                const std::uint64_t hi = (static_cast<std::uint64_t>(wblk[3]) << 32) | wblk[2];
                if (2 * blk < wpr) cb.bits[row * wpr + 2 * blk] = lo;
                if (2 * blk + 1 < wpr) cb.bits[row * wpr + 2 * blk + 1] = hi;
            }
            // mask tail bits beyond n for cleanliness
            const int rem = static_cast<int>(n & 63);
            if (rem != 0) cb.bits[row * wpr + wpr - 1] &= (~std::uint64_t{0}) >> (64 - rem);
        }
        return cb;
    }

    /// All 2^n sign patterns exactly once (row index = bit pattern); K = 1.
    static Codebook enumerate_all(std::int64_t n, double amplitude) {
        if (n < 1 || n > 24) throw ConfigError("enumerate_all: n must lie in [1,24]");
        Codebook cb;
        cb.n = n;
        cb.a = amplitude;
        cb.m = std::uint64_t{1} << n;
        cb.k = 1;
        cb.seed = 0;
        const std::size_t wpr = cb.words_per_row();
        cb.bits.assign(wpr * cb.m, 0);
        for (std::uint64_t row = 0; row < cb.m; ++row) cb.bits[row * wpr] = row;
        return cb;
    }

    void save(const std::string& path) const;
    static Codebook load(const std::string& path);
    void to_csv(const std::string& path) const;
};

inline std::vector<double> encode(const Codebook& cb, std::uint64_t msg, std::uint64_t key) {
    return cb.codeword(cb.row_index(msg, key));
}

/// Decoder statistic L(x,y) = (2<x,y> - a^2 n)/N_b, the closed form of
/// log W^{x n}(y|x)/P_0^{x n}(y) for BPSK rows.
inline double decode_statistic(const Codebook& cb, std::uint64_t row, std::span<const double> y,
                               double nb) {
    const std::size_t wpr = cb.words_per_row();
    const std::uint64_t* w = cb.bits.data() + row * wpr;
    double dot = 0.0;
    for (std::int64_t i = 0; i < cb.n; ++i) {
        const double s = ((w[i >> 6] >> (i & 63)) & 1) ? 1.0 : -1.0;
        dot += s * y[static_cast<std::size_t>(i)];
    }
    const double e = cb.a * cb.a * static_cast<double>(cb.n);
    return (2.0 * cb.a * dot - e) / nb;
}

struct DecodeOutcome {
    enum class Status { silent, decoded, error };
    Status status = Status::silent;
    std::uint64_t m_hat = 0;  // 0 when silent or error
};

/// Threshold decoder over sub-code s: unique statistic above gamma decodes,
/// none stays silent, several is an error.
inline DecodeOutcome decode(const Codebook& cb, std::uint64_t s, std::span<const double> y,
                            const SchemeParams& params) {
    if (y.size() != static_cast<std::size_t>(cb.n)) throw ConfigError("decode: observation length mismatch");
    if (s < 1 || s > cb.k) throw ConfigError("decode: key index out of range");
    DecodeOutcome out;
    std::uint64_t hits = 0;
    for (std::uint64_t msg = 1; msg <= cb.m; ++msg) {
        const double stat = decode_statistic(cb, (msg - 1) * cb.k + (s - 1), y, params.nb);
        if (stat > params.gamma) {
            ++hits;
            if (hits == 1) {
                out.m_hat = msg;
            } else {
                out.status = DecodeOutcome::Status::error;
                out.m_hat = 0;
                return out;
            }
        }
    }
    out.status = hits == 1 ? DecodeOutcome::Status::decoded : DecodeOutcome::Status::silent;
    if (hits != 1) out.m_hat = 0;
    return out;
}

inline void Codebook::save(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open '" + path + "' for writing");
    auto put_u16 = [&](std::uint16_t v) {
        for (int i = 0; i < 2; ++i) f.put(static_cast<char>((v >> (8 * i)) & 0xFF));
    };
    auto put_u32 = [&](std::uint32_t v) {
        for (int i = 0; i < 4; ++i) f.put(static_cast<char>((v >> (8 * i)) & 0xFF));
    };
    auto put_u64 = [&](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) f.put(static_cast<char>((v >> (8 * i)) & 0xFF));
    };
    f.write("CVTC", 4);
    put_u16(1);
    put_u32(static_cast<std::uint32_t>(n));
    put_u64(m);
    put_u64(k);
    std::uint64_t abits;
    static_assert(sizeof(double) == 8);
    std::memcpy(&abits, &a, 8);
    put_u64(abits);
    // row-major packed sign bits, little-endian 64-bit words
    for (std::uint64_t v : bits) put_u64(v);
    if (!f) throw ConfigError("write failed for '" + path + "'");
}

inline Codebook Codebook::load(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open '" + path + "' for reading");
    auto get_bytes = [&](int count) -> std::uint64_t {
        std::uint64_t v = 0;
        for (int i = 0; i < count; ++i) {
            const int c = f.get();
            if (c == EOF) throw ConfigError("truncated codebook file '" + path + "'");
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
        }
        return v;
    };
    char magic[4];
    f.read(magic, 4);
    if (!f || std::string(magic, 4) != "CVTC") throw ConfigError("bad magic in codebook file '" + path + "'");
    const auto version = static_cast<std::uint16_t>(get_bytes(2));
    if (version != 1) throw ConfigError("unsupported codebook version " + std::to_string(version));
    Codebook cb;
    cb.n = static_cast<std::int64_t>(get_bytes(4));
    cb.m = get_bytes(8);
    cb.k = get_bytes(8);
    const std::uint64_t abits = get_bytes(8);
    std::memcpy(&cb.a, &abits, 8);
    cb.bits.resize(cb.words_per_row() * cb.m * cb.k);
    for (auto& v : cb.bits) v = get_bytes(8);
    return cb;
}

inline void Codebook::to_csv(const std::string& path) const {
    if (rows() > 65536) throw BudgetExceeded("CSV export limited to 65536 rows");
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot open '" + path + "' for writing");
    f << "row";
    for (std::int64_t i = 0; i < n; ++i) f << ",x" << i;
    f << "\n";
    for (std::uint64_t r = 0; r < rows(); ++r) {
        f << r;
        for (std::int64_t i = 0; i < n; ++i) f << "," << sign(r, i);
        f << "\n";
    }
}

/// Result of the good/bad sub-code rearrangement: K' kept sub-codes, each
/// grown by pooled rows from the discarded sub-codes. `slots[s'][j]` is the
/// base-codebook row occupying slot (s'+1, j+1); pooled rows past the first M
/// slots carry no decoding region.
struct RearrangedCodebook {
    std::uint64_t k_prime = 0;
    std::uint64_t m_prime = 0;  // largest sub-code size after pooling
    double sqrt_eps = 0.0;
    double eps_hat = 0.0;
    std::vector<std::uint64_t> kept;                 // base sub-code index (0-based) per new sub-code
    std::vector<std::vector<std::uint64_t>> slots;   // base rows per new sub-code
    std::vector<std::uint64_t> undecodable_from;    // first undecodable slot index per new sub-code

    double error_bound() const { return sqrt_eps + eps_hat; }

    /// Arithmetic max-average error of the rearranged code given the measured
    /// per-sub-code errors of the base code (pooled slots count as errors).
    double max_avg_error(std::span<const double> base_err) const {
        double worst = 0.0;
        for (std::size_t s = 0; s < kept.size(); ++s) {
            const double m_base = static_cast<double>(undecodable_from[s]);
            const double pooled = static_cast<double>(slots[s].size()) - m_base;
            const double e = (m_base * base_err[kept[s]] + pooled) / (m_base + pooled);
            worst = std::max(worst, e);
        }
        return worst;
    }
};

/// Lemma-style rearrangement: sub-codes with measured error <= sqrt(eps) are
/// good; the rest are pooled and dealt round-robin (ascending base row) into
/// the kept sub-codes. When more than K' sub-codes are good, the good ones of
/// highest index are pooled as well.
inline RearrangedCodebook rearrange(const Codebook& cb, std::span<const double> per_subcode_err,
                                    double epsilon_n) {
    if (per_subcode_err.size() != cb.k) throw ConfigError("rearrange: need one error rate per sub-code");
    if (!(epsilon_n > 0.0 && epsilon_n < 1.0)) throw ConfigError("rearrange: epsilon_n must lie in (0,1)");
    const double se = std::sqrt(epsilon_n);

    std::vector<std::uint64_t> good;
    for (std::uint64_t s = 0; s < cb.k; ++s) {
        if (per_subcode_err[s] <= se) good.push_back(s);
    }
    if (good.empty()) {
        throw NoGoodSubcode("every sub-code exceeds the sqrt(eps) cutoff; inputs violate the Markov bound");
    }
    std::uint64_t k_prime = static_cast<std::uint64_t>(std::llround((1.0 - se) * static_cast<double>(cb.k)));
    k_prime = std::max<std::uint64_t>(1, std::min<std::uint64_t>(k_prime, good.size()));

    RearrangedCodebook out;
    out.k_prime = k_prime;
    out.sqrt_eps = se;
    out.eps_hat = se / (1.0 - se);
    out.kept.assign(good.begin(), good.begin() + static_cast<std::ptrdiff_t>(k_prime));

    std::vector<bool> is_kept(cb.k, false);
    for (std::uint64_t s : out.kept) is_kept[s] = true;

    out.slots.resize(k_prime);
    out.undecodable_from.resize(k_prime);
    for (std::uint64_t j = 0; j < k_prime; ++j) {
        out.slots[j].reserve(cb.m + 1);
        for (std::uint64_t msg = 1; msg <= cb.m; ++msg) {
            out.slots[j].push_back((msg - 1) * cb.k + out.kept[j]);
        }
        out.undecodable_from[j] = cb.m;
    }
    // Pool everything not kept, ascending base row index, dealt round-robin.
    std::uint64_t next = 0;
    for (std::uint64_t row = 0; row < cb.rows(); ++row) {
        if (is_kept[row % cb.k]) continue;
        out.slots[next % k_prime].push_back(row);
        ++next;
    }
    out.m_prime = 0;
    for (const auto& s : out.slots) out.m_prime = std::max<std::uint64_t>(out.m_prime, s.size());
    return out;
}

}  // namespace covert
