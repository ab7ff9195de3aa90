// SPDX-License-Identifier: Apache-2.0
#pragma once

// Pulse-duration optimization against a spectral mask. Feasibility of a
// duration is monotone (growing t0 compresses the normalized spectrum), which
// makes bisection exact up to tolerance; the roll-off factor is minimized
// over a grid with golden-section refinement, with the dense grid as referee.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "covert/errors.hpp"
#include "covert/parallel.hpp"
#include "covert/quadrature.hpp"
#include "covert/rrc.hpp"
#include "covert/scheme.hpp"
#include "covert/spectral_mask.hpp"

namespace covert {

struct FeasibilityOptions {
    int grid_points = 2048;
    double quad_tol = 1e-11;
};

/// Multiplies (V_i, eta_i); (1, 1) is the plain problem, the slackness-
/// tightened problem uses ((1-u)/(1+u), 1/(1-u)).
struct ConstraintScaling {
    double db_factor = 1.0;
    double eta_factor = 1.0;
};

/// Does the normalized profile |phihat_{t0,beta}|^2 satisfy both mask clauses?
inline bool pulse_profile_feasible(const RrcPulse& pulse, const SpectralMask& mask,
                                   const ConstraintScaling& scaling = {},
                                   const FeasibilityOptions& opts = {}) {
    const double peak0 = pulse.freq(0.0);
    const double peak = peak0 * peak0;  // spectrum max sits at f = 0
    const double pole =
        (pulse.beta > 0.0) ? (1.0 + pulse.beta) / (4.0 * pulse.beta * pulse.t0) : -1.0;

    for (const auto& c : mask.constraints) {
        const double thr = c.v() * scaling.db_factor * peak;
        if (!(thr > 0.0)) return false;
        const double lo = c.alpha * mask.w;

        // Out-of-band peak: grid + golden refinement out to where the envelope
        // bound settles the rest of the line.
        double f_env = std::max(lo, pulse.envelope_valid_from());
        bool env_ok = false;
        for (int i = 0; i < 400; ++i) {
            if (pulse.freq_sq_envelope(f_env) < thr) {
                env_ok = true;
                break;
            }
            f_env *= 1.5;
        }
        if (!env_ok) return false;
        if (f_env > lo) {
            auto sq = [&pulse](double f) {
                const double s = pulse.freq(f);
                return s * s;
            };
            const auto [f_at, worst] = detail::grid_max(sq, lo, f_env, opts.grid_points);
            (void)f_at;
            if (!(worst < thr)) return false;
        }

        const double eta_req = c.eta * scaling.eta_factor;
        if (!(eta_req < 1.0)) return false;  // in-band fraction is strictly below total energy 1
        const double cuts[] = {pole};
        const double inband =
            2.0 * quad_or_throw([&pulse](double f) { const double s = pulse.freq(f); return s * s; },
                                0.0, lo, {opts.quad_tol, 40000},
                                std::span<const double>(cuts, pole > 0.0 && pole < lo ? 1 : 0));
        if (!(inband >= eta_req)) return false;
    }
    return true;
}

namespace detail {

template <class Feasible>
inline double bisect_duration(const Feasible& feasible, double lo0, double hi0, double rel_tol,
                              int max_growth, const char* who) {
    double lo = lo0;
    double hi = hi0;
    bool hi_ok = feasible(hi);
    for (int i = 0; i < max_growth && !hi_ok; ++i) {
        lo = hi;
        hi *= 2.0;
        hi_ok = feasible(hi);
    }
    if (!hi_ok) {
        throw InfeasibleMask(std::string(who) + ": no feasible pulse duration in the search bracket");
    }
    // keep lo infeasible
    if (feasible(lo)) {
        double shrink = lo;
        bool lo_feasible = true;
        for (int i = 0; i < 60 && lo_feasible; ++i) {
            shrink *= 0.5;
            lo_feasible = feasible(shrink);
        }
        if (lo_feasible) {
            throw ConfigError(std::string(who) + ": could not bracket the feasibility boundary");
        }
        lo = shrink;
    }
    while (hi - lo > rel_tol * hi) {
        const double mid = 0.5 * (lo + hi);
        (feasible(mid) ? hi : lo) = mid;
    }
    return hi;  // feasible endpoint; strict margins hold there
}

}  // namespace detail

/// Smallest t0 such that |phihat_{t0,beta}|^2 fits the mask (P1 with fixed beta).
inline double solve_p1_beta(const SpectralMask& mask, double beta, double rel_tol = 1e-6,
                            const FeasibilityOptions& opts = {}) {
    mask.validate();
    for (const auto& c : mask.constraints) {
        if (c.eta > 1.0) {
            throw InfeasibleMask("energy fraction eta = " + std::to_string(c.eta) + " exceeds 1");
        }
    }
    const double alpha1w = mask.constraints.front().alpha * mask.w;
    auto feasible = [&](double t0) {
        return pulse_profile_feasible(RrcPulse(t0, beta), mask, {}, opts);
    };
    return detail::bisect_duration(feasible, 1e-3 / alpha1w, 1.0 / alpha1w, rel_tol, 20,
                                   "solve_p1_beta");
}

struct OptimizerResult {
    double t0_star = 0.0;
    double beta_star = 0.0;
    std::vector<std::pair<double, double>> c_beta_curve;  // (beta, W * t0*(beta))
    int binding = -1;
    double tol = 0.0;
    double w = 0.0;
    double min_c = 0.0;  // W * t0_star
};

/// P1: minimize over the beta grid, then golden-section refine around the best
/// grid point (to 1e-4 in beta). The grid never loses to the refinement.
inline OptimizerResult solve_p1(const SpectralMask& mask, int beta_grid_size = 101,
                                double rel_tol = 1e-6, const FeasibilityOptions& opts = {}) {
    if (beta_grid_size < 2) throw ConfigError("solve_p1: beta grid needs at least 2 points");
    mask.validate();

    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> betas(static_cast<std::size_t>(beta_grid_size));
    std::vector<double> t0s(static_cast<std::size_t>(beta_grid_size), inf);
    for (int j = 0; j < beta_grid_size; ++j) {
        betas[static_cast<std::size_t>(j)] = static_cast<double>(j) / (beta_grid_size - 1);
    }
    parallel_for(static_cast<std::uint64_t>(beta_grid_size), [&](std::uint64_t b, std::uint64_t e) {
        for (std::uint64_t j = b; j < e; ++j) {
            try {
                t0s[j] = solve_p1_beta(mask, betas[j], rel_tol, opts);
            } catch (const InfeasibleMask&) {
                t0s[j] = inf;
            }
        }
    });

    std::size_t best = 0;
    for (std::size_t j = 1; j < t0s.size(); ++j) {
        if (t0s[j] < t0s[best]) best = j;
    }
    if (!std::isfinite(t0s[best])) {
        throw InfeasibleMask("solve_p1: mask infeasible for every roll-off factor");
    }

    OptimizerResult res;
    res.tol = rel_tol;
    res.w = mask.w;
    res.c_beta_curve.reserve(t0s.size());
    for (std::size_t j = 0; j < t0s.size(); ++j) {
        res.c_beta_curve.emplace_back(betas[j], std::isfinite(t0s[j]) ? mask.w * t0s[j] : inf);
    }

    // Golden-section refinement of beta within the bracketing grid cells.
    double lo = betas[best > 0 ? best - 1 : best];
    double hi = betas[best + 1 < betas.size() ? best + 1 : best];
    double best_beta = betas[best], best_t0 = t0s[best];
    auto value = [&](double beta) {
        try {
            return solve_p1_beta(mask, beta, rel_tol, opts);
        } catch (const InfeasibleMask&) {
            return inf;
        }
    };
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
    double fc = value(c), fd = value(d);
    while (hi - lo > 1e-4) {
        if (fc < fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - gr * (hi - lo);
            fc = value(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + gr * (hi - lo);
            fd = value(d);
        }
        if (fc < best_t0) {
            best_t0 = fc;
            best_beta = c;
        }
        if (fd < best_t0) {
            best_t0 = fd;
            best_beta = d;
        }
    }

    res.t0_star = best_t0;
    res.beta_star = best_beta;
    res.min_c = mask.w * best_t0;
    const auto fit = check_fit(ensemble_esd(1.0, 1, RrcPulse(best_t0, best_beta)), mask);
    res.binding = fit.binding;
    return res;
}

/// Slackness u(T, t0) = n / (MK)^{1/4} with n = T/t0 and MK = f(n) from the
/// scheme's rate formulas for the chosen metric.
struct SlacknessSpec {
    double t = 0.0;  // total transmission time T (seconds)
    Metric metric = Metric::tv;
    double nw = 1.0;
    double nb = 1.0;
    double delta = 0.5;

    double u(double t0) const {
        const double n = t / t0;
        if (!(n > 3.0)) return std::numeric_limits<double>::infinity();
        const auto [lm, lk] = scheme_log_sizes(n, nw, nb, delta, metric);
        return n * std::exp(-(lm + lk) / 4.0);
    }
};

/// P2 with fixed beta: the dB threshold is scaled by (1-u)/(1+u) and the
/// energy requirement by 1/(1-u), with u evaluated at each probed duration.
inline double solve_p2(const SpectralMask& mask, double beta, const SlacknessSpec& slack,
                       double rel_tol = 1e-6, const FeasibilityOptions& opts = {}) {
    mask.validate();
    const double p1 = solve_p1_beta(mask, beta, rel_tol, opts);
    auto feasible = [&](double t0) {
        const double u = slack.u(t0);  // may underflow to 0 for huge T; that is just "no slack"
        if (!(u >= 0.0) || u >= 1.0) return false;
        const ConstraintScaling scaling{(1.0 - u) / (1.0 + u), 1.0 / (1.0 - u)};
        return pulse_profile_feasible(RrcPulse(t0, beta), mask, scaling, opts);
    };
    try {
        return detail::bisect_duration(feasible, p1 * (1.0 - rel_tol), p1, rel_tol, 40, "solve_p2");
    } catch (const InfeasibleMask&) {
        throw SlacknessTooLarge("solve_p2: slackness keeps every duration in the bracket infeasible");
    }
}

struct BlocklengthResult {
    std::int64_t n = 0;
    double fit_probability_bound = 0.0;  // lower bound; 1 - 2 n^2 exp(-sqrt(MK)/2)
    double log10_fail_bound = 0.0;       // log10 of the failure probability bound
};

/// Lemma-style blocklength rule n = floor((1-xi) W T / min_beta c(beta)).
inline BlocklengthResult blocklength(const OptimizerResult& opt, double t, double xi, Metric metric,
                                     double nw, double nb, double delta) {
    if (!(t > 0.0)) throw ConfigError("blocklength: T must be positive");
    if (!(xi >= 0.0 && xi < 1.0)) throw ConfigError("blocklength: xi must lie in [0,1)");
    BlocklengthResult r;
    r.n = static_cast<std::int64_t>(std::floor((1.0 - xi) * opt.w * t / opt.min_c));
    if (r.n < 3) {
        r.fit_probability_bound = 0.0;
        r.log10_fail_bound = 0.0;
        return r;
    }
    const auto [lm, lk] = scheme_log_sizes(static_cast<double>(r.n), nw, nb, delta, metric);
    const double half_log_mk = (lm + lk) / 2.0;
    // failure <= 2 n^2 exp(-sqrt(MK)/2); computed in log space to dodge overflow
    const double sqrt_mk = half_log_mk > 700.0 ? std::numeric_limits<double>::infinity()
                                               : std::exp(half_log_mk);
    const double log_fail =
        std::numbers::ln2 + 2.0 * std::log(static_cast<double>(r.n)) - sqrt_mk / 2.0;
    r.log10_fail_bound = log_fail / std::numbers::ln10;
    r.fit_probability_bound = std::isinf(log_fail) ? 1.0 : std::max(0.0, 1.0 - std::exp(log_fail));
    return r;
}

}  // namespace covert
