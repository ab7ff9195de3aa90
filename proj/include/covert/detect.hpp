// SPDX-License-Identifier: Apache-2.0
#pragma once

// Warden-side machinery: the output densities Q0/Qa/Qtilde, product and
// codebook-mixture likelihood ratios, closed-form and Monte Carlo total
// variation, Berry-Esseen moments, the power detector, KL quantities, and the
// density-crossover root. Mixtures are evaluated in log space throughout;
// every divergence estimator returns exact zero when the amplitude is zero.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <mutex>
#include <numbers>
#include <span>
#include <vector>

#include "covert/errors.hpp"
#include "covert/normal.hpp"
#include "covert/parallel.hpp"
#include "covert/quadrature.hpp"
#include "covert/rng.hpp"
#include "covert/scheme.hpp"

namespace covert {

namespace detail {

inline double log_cosh(double y) {
    const double ay = std::abs(y);
    return ay - std::numbers::ln2 + std::log1p(std::exp(-2.0 * ay));
}

}  // namespace detail

/// Willie's single-letter output distributions for amplitude a and noise N_w
/// (Bob's P0/Pa/Ptilde are the same object with N_w -> N_b).
struct OutputDists {
    double nw = 1.0;
    double a = 0.0;

    OutputDists(double nw_, double a_) : nw(nw_), a(a_) {
        if (!(nw > 0.0)) throw ConfigError("OutputDists: noise parameter must be positive");
        if (!(a >= 0.0)) throw ConfigError("OutputDists: amplitude must be non-negative");
    }

    double log_q0(double z) const { return -z * z / nw - 0.5 * std::log(std::numbers::pi * nw); }
    double log_qa(double z) const { return -(z - a) * (z - a) / nw - 0.5 * std::log(std::numbers::pi * nw); }
    double log_qma(double z) const { return -(z + a) * (z + a) / nw - 0.5 * std::log(std::numbers::pi * nw); }
    double log_qt(double z) const { return log_q0(z) + llr(z); }

    double q0(double z) const { return std::exp(log_q0(z)); }
    double qa(double z) const { return std::exp(log_qa(z)); }
    double qma(double z) const { return std::exp(log_qma(z)); }
    double qt(double z) const { return std::exp(log_qt(z)); }

    /// log(Qtilde(z)/Q0(z)) = -a^2/N_w + log cosh(2 a z / N_w), the stable
    /// log-sum-exp form of the two-branch mixture ratio.
    double llr(double z) const {
        if (a == 0.0) return 0.0;
        return -a * a / nw + detail::log_cosh(2.0 * a * z / nw);
    }
};

/// Product-distribution log-likelihood ratio sum_i log(Qtilde(z_i)/Q0(z_i)).
inline double llr_product(std::span<const double> z, const OutputDists& dists) {
    if (dists.a == 0.0) return 0.0;
    double s = 0.0;
    for (double v : z) s += dists.llr(v);
    return s;
}

/// Leading closed form of V(Qtilde^n, Q0^n): 1 - 2 Q((a^2/N_w) sqrt(n/2)).
inline double tv_closed_form(double a, double nw, std::int64_t n) {
    if (a == 0.0) return 0.0;
    return 1.0 - 2.0 * gauss_q(a * a / nw * std::sqrt(static_cast<double>(n) / 2.0));
}

struct TvProductResult {
    double closed_form = 0.0;
    double mc = 0.0;
    double mc_stderr = 0.0;
    std::uint64_t trials = 0;
};

/// Monte Carlo V(Qtilde^n, Q0^n) via the two-probability representation with
/// independent sample banks, alongside the closed form.
inline TvProductResult tv_product(double a, double nw, std::int64_t n, std::uint64_t trials,
                                  std::uint64_t seed) {
    if (n < 2) throw ConfigError("tv_product: n must be >= 2");
    TvProductResult out;
    out.closed_form = tv_closed_form(a, nw, n);
    out.trials = trials;
    if (trials == 0) return out;
    if (a == 0.0) return out;  // exact: the two banks share one distribution

    const OutputDists dists(nw, a);
    const double sigma = std::sqrt(nw / 2.0);
    const std::uint64_t key_p = rng::stream_key(seed, rng::Stream::bank_p);
    const std::uint64_t key_q = rng::stream_key(seed, rng::Stream::bank_q);
    std::uint64_t hits_p = 0, hits_q = 0;
    std::mutex merge;

    parallel_for(trials, [&](std::uint64_t b, std::uint64_t e) {
        std::uint64_t local_p = 0, local_q = 0;
        for (std::uint64_t t = b; t < e; ++t) {
            double sp = 0.0, sq = 0.0;
            for (std::int64_t i = 0; i < n; ++i) {
                const auto w = rng::philox_block(key_p, t, static_cast<std::uint64_t>(i));
                const double u1 = rng::u01(w[0], w[1]);
                const double u2 = rng::u01(w[2], w[3]);
                const double r = std::sqrt(-2.0 * std::log(u1));
                const double zp = ((w[0] & 1) ? a : -a) +
                                  sigma * r * std::cos(2.0 * std::numbers::pi * u2);
                sp += dists.llr(zp);
                const double zq = sigma * rng::normal(key_q, t, static_cast<std::uint64_t>(i));
                sq += dists.llr(zq);
            }
            if (sp >= 0.0) ++local_p;
            if (sq >= 0.0) ++local_q;
        }
        const std::lock_guard<std::mutex> lock(merge);
        hits_p += local_p;
        hits_q += local_q;
    });

    const double p1 = static_cast<double>(hits_p) / static_cast<double>(trials);
    const double p2 = static_cast<double>(hits_q) / static_cast<double>(trials);
    out.mc = p1 - p2;
    out.mc_stderr = std::sqrt((p1 * (1.0 - p1) + p2 * (1.0 - p2)) / static_cast<double>(trials));
    return out;
}

struct BeMoments {
    // under Q0: mean, variance, absolute third central moment of the llr
    double mu0 = 0.0, var0 = 0.0, s0 = 0.0;
    // under Qtilde
    double mut = 0.0, vart = 0.0, st = 0.0;
    // leading-order values (third moments are O(a^6), i.e. zero at this order)
    double lead_mu0 = 0.0, lead_var0 = 0.0, lead_mut = 0.0, lead_vart = 0.0;
};

/// Moments of log(Qtilde/Q0) under Q0 and Qtilde, by adaptive quadrature, next
/// to their leading-order formulas -a^4/N_w^2, 2a^4/N_w^2, +a^4/N_w^2,
/// 2a^4/N_w^2.
inline BeMoments berry_esseen_moments(double a, double nw, double quad_tol = 1e-12) {
    BeMoments m;
    if (a == 0.0) return m;
    const OutputDists d(nw, a);
    const double sigma = std::sqrt(nw / 2.0);
    const double lim = a + 14.0 * sigma;
    const double a4 = a * a * a * a / (nw * nw);
    m.lead_mu0 = -a4;
    m.lead_var0 = 2.0 * a4;
    m.lead_mut = a4;
    m.lead_vart = 2.0 * a4;

    const QuadOptions opt{quad_tol, 40000};
    const double base_cuts[] = {-a, 0.0, a};
    auto moment = [&](auto&& weight, auto&& fn) {
        return quad_or_throw([&](double z) { return weight(z) * fn(z); }, -lim, lim, opt, base_cuts);
    };
    auto w0 = [&](double z) { return d.q0(z); };
    auto wt = [&](double z) { return d.qt(z); };
    auto ll = [&](double z) { return d.llr(z); };

    m.mu0 = moment(w0, ll);
    m.mut = moment(wt, ll);
    const double e2_0 = moment(w0, [&](double z) { const double v = ll(z); return v * v; });
    const double e2_t = moment(wt, [&](double z) { const double v = ll(z); return v * v; });
    m.var0 = e2_0 - m.mu0 * m.mu0;
    m.vart = e2_t - m.mut * m.mut;

    // |llr - mu|^3 has kinks where llr crosses mu; llr is even and increasing
    // in |z|, so the crossings are symmetric roots found by bisection.
    auto abs3 = [&](double mu, auto&& weight) {
        double root = 0.0;
        if (ll(0.0) < mu) {
            double lo = 0.0, hi = lim;
            for (int i = 0; i < 200 && hi - lo > 1e-15 * lim; ++i) {
                const double mid = 0.5 * (lo + hi);
                (ll(mid) < mu ? lo : hi) = mid;
            }
            root = 0.5 * (lo + hi);
        }
        const double cuts[] = {-root, -a, 0.0, a, root};
        return quad_or_throw(
            [&](double z) {
                const double v = std::abs(ll(z) - mu);
                return weight(z) * v * v * v;
            },
            -lim, lim, opt, cuts);
    };
    m.s0 = abs3(m.mu0, w0);
    m.st = abs3(m.mut, wt);
    return m;
}

namespace detail {

/// log[(1/R) sum_r exp(L_r(z))] with L_r = (2 a <sigma_r, z> - a^2 n)/N_w,
/// over the given rows of the codebook; online log-sum-exp.
inline double mixture_log_ratio(const Codebook& cb, std::span<const std::uint64_t> rows,
                                std::span<const double> z, double nw) {
    const std::size_t wpr = cb.words_per_row();
    const double e = cb.a * cb.a * static_cast<double>(cb.n);
    double mx = -std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (const std::uint64_t row : rows) {
        const std::uint64_t* w = cb.bits.data() + row * wpr;
        double dot = 0.0;
        for (std::int64_t i = 0; i < cb.n; ++i) {
            const double s = ((w[i >> 6] >> (i & 63)) & 1) ? 1.0 : -1.0;
            dot += s * z[static_cast<std::size_t>(i)];
        }
        const double l = (2.0 * cb.a * dot - e) / nw;
        if (l <= mx) {
            sum += std::exp(l - mx);
        } else {
            sum =سum_rescale(sum, mx, l);
            mx = l;
        }
    }
    return mx + std::log1p(sum - 1.0 + 1.0) - std::log(static_cast<double>(rows.size()));
}

}  // namespace detail

struct TvCodebookResult {
    double v_q0 = 0.0;        // V(Qhat, Q0^n)
    double v_q0_stderr = 0.0;
    double v_qt = 0.0;        // V(Qhat, Qtilde^n)
    double v_qt_stderr = 0.0;
    std::uint64_t trials = 0;
    std::uint64_t mixture_rows = 0;   // rows used per mixture evaluation
    double subsample_spread = 0.0;    // half-difference between disjoint subsample halves
};

/// Budget: a full M K-mixture per sample is allowed up to 2^16 rows; beyond
/// that callers must pass a subsample size (uniform rows, extra variance
/// reported via subsample_spread).
inline TvCodebookResult tv_codebook(const Codebook& cb, std::uint64_t trials, std::uint64_t seed,
                                    std::uint64_t subsample = 0);

/// Power detector: decide "transmitting" iff sum z_i^2 >= tau.
inline double power_threshold(std::int64_t n, double nw, double p_min) {
    return static_cast<double>(n) * nw / 2.0 + p_min / 2.0;
}

inline bool power_detector(std::span<const double> z, double nw, double p_min) {
    double s = 0.0;
    for (double v : z) s += v * v;
    return s >= power_threshold(static_cast<std::int64_t>(z.size()), nw, p_min);
}

enum class DetectorKind { power, lrt_product, lrt_codebook };

struct DetectionResult {
    double p_fa = 0.0;
    double p_md = 0.0;
    double sum = 0.0;
    double stderr_combined = 0.0;
    std::uint64_t trials = 0;
    double threshold = 0.0;
};

struct RocPoint {
    double threshold = 0.0;
    double p_fa = 0.0;
    double p_md = 0.0;
};

struct DetectionRun {
    DetectionResult result;
    std::vector<RocPoint> roc;
};

/// Monte Carlo detection experiment against the codebook-induced H1. The ROC
/// sweeps the detector statistic's threshold over the pooled sample range.
DetectionRun run_detector(const Codebook& cb, double nw, DetectorKind kind, std::uint64_t trials,
                          std::uint64_t seed, int roc_points = 41);

struct KlSingleLetter {
    double quadrature = 0.0;
    double taylor_chain = 0.0;  // the truncated series bound
    double leading = 0.0;       // a^4 / N_w^2
};

/// D(Qtilde || Q0) by quadrature plus the series-chain and leading bounds.
inline KlSingleLetter kl_single_letter(double a, double nw, double quad_tol = 1e-13) {
    KlSingleLetter r;
    if (a == 0.0) return r;
    const OutputDists d(nw, a);
    const double lim = a + 14.0 * std::sqrt(nw / 2.0);
    const double cuts[] = {-a, 0.0, a};
    r.quadrature = quad_or_throw([&](double z) { return d.qt(z) * d.llr(z); }, -lim, lim,
                                 {quad_tol, 40000}, cuts);
    const double q = a * a / nw;
    r.leading = q * q;
    r.taylor_chain = q * q - (4.0 / 3.0) * q * q * q + (44.0 / 3.0) * q * q * q * q +
                     (32.0 / 3.0) * q * q * q * q * q + (64.0 / 45.0) * q * q * q * q * q * q;
    return r;
}

struct KlExponent {
    double value = 0.0;   // f(rho)
    double f0 = 0.0;      // f(0), zero up to quadrature error
    double fprime0 = 0.0; // R - I(X;Z)
    double fdoubleprime0 = 0.0;
    double i_xz = 0.0;    // I(X;Z) = D(Q_a || Qtilde)
};

/// f(rho) = rho R - log sum_x P_X(x) int W(z|x)^{1+rho} Qtilde(z)^{-rho} dz,
/// with the x = +-a terms equal by symmetry.
inline KlExponent kl_exponent_f(double rho, double r_rate, double a, double nw,
                                double quad_tol = 1e-13) {
    if (!(rho >= 0.0 && rho <= 1.0)) throw ConfigError("kl_exponent_f: rho must lie in [0,1]");
    KlExponent out;
    if (a == 0.0) {
        out.fprime0 = r_rate;
        out.value = 0.0;
        return out;
    }
    const OutputDists d(nw, a);
    const double lim = a + 14.0 * std::sqrt(nw / 2.0) * (1.0 + rho);
    const double cuts[] = {-a, 0.0, a};
    const QuadOptions opt{quad_tol, 40000};

    auto j_of = [&](double p) {
        return quad_or_throw(
            [&](double z) { return std::exp((1.0 + p) * d.log_qa(z) - p * d.log_qt(z)); }, -lim, lim,
            opt, cuts);
    };
    out.value = rho * r_rate - std::log(j_of(rho));
    out.f0 = -std::log(j_of(0.0));

    // log(Qa/Qtilde) = log 2 - log(1 + exp(-4 a z / N_w)), stable at any |z|.
    auto log_ratio = [&](double z) {
        const double y = -4.0 * a * z / nw;
        return std::numbers::ln2 - (y > 0.0 ? y + std::log1p(std::exp(-y)) : std::log1p(std::exp(y)));
    };
    out.i_xz = quad_or_throw([&](double z) { return d.qa(z) * log_ratio(z); }, -lim, lim, opt, cuts);
    const double e2 = quad_or_throw(
        [&](double z) {
            const double v = log_ratio(z);
            return d.qa(z) * v * v;
        },
        -lim, lim, opt, cuts);
    out.fprime0 = r_rate - out.i_xz;
    out.fdoubleprime0 = out.i_xz * out.i_xz - e2;
    return out;
}

/// Positive root of Qtilde(z) = Q0(z): nu = (N_w / 2a) arccosh(e^{a^2/N_w}),
/// computed overflow-free as y + log(1 + sqrt(1 - e^{-2y})) with y = a^2/N_w.
inline double nu_crossover(double a, double nw) {
    if (!(a > 0.0)) throw ConfigError("nu_crossover: amplitude must be positive");
    const double y = a * a / nw;
    const double acosh_ey = y + std::log1p(std::sqrt(-std::expm1(-2.0 * y)));
    return nw / (2.0 * a) * acosh_ey;
}

}  // namespace covert
