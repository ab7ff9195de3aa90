// SPDX-License-Identifier: Apache-2.0
#pragma once

// Spectral masks, energy spectral densities, mask-fit verification, and the
// ensemble-concentration check. ESDs factor as |phihat(f)|^2 * shape(f) with
// shape a cosine polynomial in the lag autocorrelations, so the concentration
// ratio is |phihat|^2-free and in-band energies integrate cheaply.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "covert/errors.hpp"
#include "covert/quadrature.hpp"
#include "covert/rrc.hpp"
#include "covert/scheme.hpp"

namespace covert {

struct MaskConstraint {
    double u_db = 0.0;  // attenuation U_i in dB
    double alpha = 0.0; // bandwidth multiplier alpha_i
    double eta = 0.0;   // in-band energy fraction eta_i
    double v() const { return std::pow(10.0, -u_db / 10.0); }
};

struct SpectralMask {
    double w = 0.0;
    std::vector<MaskConstraint> constraints;

    void validate() const {
        if (!(w > 0.0)) throw ConfigError("SpectralMask: W must be positive");
        if (constraints.empty()) throw ConfigError("SpectralMask: need at least one constraint");
        for (std::size_t i = 0; i < constraints.size(); ++i) {
            const auto& c = constraints[i];
            if (!(c.u_db > 0.0)) throw ConfigError("SpectralMask: U_dB must be positive");
            if (!(c.alpha > 0.0)) throw ConfigError("SpectralMask: alpha must be positive");
            if (!(c.eta > 0.0)) throw ConfigError("SpectralMask: eta must be positive");
            if (i > 0) {
                if (c.u_db < constraints[i - 1].u_db || c.alpha < constraints[i - 1].alpha ||
                    c.eta < constraints[i - 1].eta) {
                    throw ConfigError("SpectralMask: {U_i}, {alpha_i}, {eta_i} must be non-decreasing");
                }
            }
        }
    }

    double max_alpha_w() const {
        double v = 0.0;
        for (const auto& c : constraints) v = std::max(v, c.alpha * w);
        return v;
    }
};

/// Ehat(f) = |phihat(f)|^2 * shape(f); total_energy is analytic (Parseval +
/// orthonormal basis), shape_sup bounds shape for tail estimates.
struct EsdProfile {
    RrcPulse pulse;
    std::function<double(double)> shape;
    double shape_sup = 0.0;
    double total_energy = 0.0;

    double operator()(double f) const {
        const double s = pulse.freq(f);
        return s * s * shape(f);
    }
};

namespace detail {

// Lag autocorrelations r_d = sum_i x_i x_{i+d}; shape(f) = r_0 + 2 sum_d r_d cos(2 pi d t0 f).
inline std::vector<double> lag_sums(std::span<const double> x) {
    const std::size_t n = x.size();
    std::vector<double> r(n, 0.0);
    for (std::size_t d = 0; d < n; ++d) {
        double acc = 0.0;
        for (std::size_t i = 0; i + d < n; ++i) acc += x[i] * x[i + d];
        r[d] = acc;
    }
    return r;
}

inline double shape_from_lags(const std::vector<double>& lags, double t0, double f) {
    double v = lags[0];
    const double base = 2.0 * std::numbers::pi * t0 * f;
    for (std::size_t d = 1; d < lags.size(); ++d) {
        if (lags[d] != 0.0) v += 2.0 * lags[d] * std::cos(base * static_cast<double>(d));
    }
    return v;
}

}  // namespace detail

inline EsdProfile codeword_esd(std::span<const double> x, const RrcPulse& pulse) {
    if (x.empty()) throw ConfigError("codeword_esd: empty codeword");
    auto lags = detail::lag_sums(x);
    double sum_abs = 0.0, sum_sq = 0.0;
    for (double v : x) {
        sum_abs += std::abs(v);
        sum_sq += v * v;
    }
    const double t0 = pulse.t0;
    EsdProfile esd{pulse, [lags = std::move(lags), t0](double f) {
                       return std::max(0.0, detail::shape_from_lags(lags, t0, f));
                   },
                   sum_abs * sum_abs, sum_sq};
    return esd;
}

/// Pointwise average of the codeword ESDs over all MK rows. Lag sums are
/// aggregated once (O(MK n^2)) when affordable; larger codebooks fall back to
/// direct per-frequency evaluation (O(MK n) per call).
inline EsdProfile codebook_esd(const Codebook& cb, const RrcPulse& pulse,
                               std::uint64_t lag_budget = std::uint64_t{1} << 28) {
    if (cb.rows() == 0) throw ConfigError("codebook_esd: empty codebook");
    const double a2 = cb.a * cb.a;
    const double n = static_cast<double>(cb.n);
    const double t0 = pulse.t0;
    const double rows = static_cast<double>(cb.rows());

    EsdProfile esd{pulse, {}, a2 * n * n, a2 * n};
    const double cost = rows * n * n;
    if (cost <= static_cast<double>(lag_budget)) {
        std::vector<double> lags(static_cast<std::size_t>(cb.n), 0.0);
        for (std::uint64_t row = 0; row < cb.rows(); ++row) {
            for (std::int64_t d = 0; d < cb.n; ++d) {
                double acc = 0.0;
                for (std::int64_t i = 0; i + d < cb.n; ++i) {
                    acc += static_cast<double>(cb.sign(row, i) * cb.sign(row, i + d));
                }
                lags[static_cast<std::size_t>(d)] += acc;
            }
        }
        for (auto& v : lags) v *= a2 / rows;
        esd.shape = [lags = std::move(lags), t0](double f) {
            return std::max(0.0, detail::shape_from_lags(lags, t0, f));
        };
    } else {
        const Codebook* base = &cb;
        esd.shape = [base, a2, t0](double f) {
            // |sum_i x_i e^{-j 2 pi (i-1/2) t0 f}|^2 averaged over rows
            const double th = 2.0 * std::numbers::pi * t0 * f;
            double acc = 0.0;
            std::vector<double> c(static_cast<std::size_t>(base->n)), s(static_cast<std::size_t>(base->n));
            for (std::int64_t i = 0; i < base->n; ++i) {
                c[static_cast<std::size_t>(i)] = std::cos(th * (static_cast<double>(i) + 0.5));
                s[static_cast<std::size_t>(i)] = std::sin(th * (static_cast<double>(i) + 0.5));
            }
            for (std::uint64_t row = 0; row < base->rows(); ++row) {
                double re = 0.0, im = 0.0;
                for (std::int64_t i = 0; i < base->n; ++i) {
                    const double sg = static_cast<double>(base->sign(row, i));
                    re += sg * c[static_cast<std::size_t>(i)];
                    im -= sg * s[static_cast<std::size_t>(i)];
                }
                acc += re * re + im * im;
            }
            return a2 * acc / static_cast<double>(base->rows());
        };
    }
    return esd;
}

/// Ensemble-averaged ESD a_n^2 n |phihat(f)|^2.
inline EsdProfile ensemble_esd(double a_n, std::int64_t n, const RrcPulse& pulse) {
    if (!(a_n > 0.0) || n < 1) throw ConfigError("ensemble_esd: need a_n > 0 and n >= 1");
    const double e = a_n * a_n * static_cast<double>(n);
    return EsdProfile{pulse, [e](double) { return e; }, e, e};
}

struct FitGrid {
    int points = 4096;
    double f_max = 0.0;       // 0 = derive from the mask and pulse envelope
    double agree_rel = 1e-3;  // two-resolution agreement tolerance
    double quad_tol = 1e-10;
};

struct FitReport {
    enum class Status { ok, grid_too_coarse };
    Status status = Status::ok;
    bool fits = false;
    double esd_max = 0.0;
    double f_at_max = 0.0;
    struct PerConstraint {
        double worst_out_of_band = 0.0;
        double f_worst = 0.0;
        double peak_margin = 0.0;   // 1 - worst/(V_i * esd_max), > 0 passes
        double inband_fraction = 0.0;
        double energy_margin = 0.0; // inband_fraction - eta_i, > 0 passes
        bool peak_ok = false;
        bool energy_ok = false;
    };
    std::vector<PerConstraint> per;
    int binding = -1;  // constraint with the smallest margin
};

namespace detail {

// Golden-section refinement of a local maximum around grid index i.
template <class F>
inline std::pair<double, double> refine_max(const F& f, double lo, double hi) {
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < 80 && (b - a) > 1e-13 * (std::abs(a) + std::abs(b) + 1e-6); ++it) {
        if (fc < fd) {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = f(d);
        } else {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = f(c);
        }
    }
    const double xm = 0.5 * (a + b);
    return {xm, f(xm)};
}

template <class F>
inline std::tuple<double, double> grid_max(const F& f, double lo, double hi, int points) {
    double best = -1.0, best_x = lo;
    for (int i = 0; i <= points; ++i) {
        const double x = lo + (hi - lo) * static_cast<double>(i) / points;
        const double v = f(x);
        if (v > best) {
            best = v;
            best_x = x;
        }
    }
    const double step = (hi - lo) / points;
    auto [xr, vr] = refine_max(f, std::max(lo, best_x - step), std::min(hi, best_x + step));
    if (vr > best) return {xr, vr};
    return {best_x, best};
}

struct FitPass {
    double esd_max, f_at_max;
    std::vector<double> worst_out, f_worst, inband;
};

inline FitPass fit_pass(const EsdProfile& esd, const SpectralMask& mask, const FitGrid& grid,
                        double f_max) {
    FitPass p;
    auto ev = [&esd](double f) { return esd(f); };
    std::tie(p.f_at_max, p.esd_max) = grid_max(ev, 0.0, f_max, grid.points);
    for (const auto& c : mask.constraints) {
        const double lo = c.alpha * mask.w;
        double wo = 0.0, fw = lo;
        if (lo < f_max) {
            std::tie(fw, wo) = grid_max(ev, lo, f_max, grid.points);
        }
        // Beyond the sampled range the pulse envelope times shape_sup bounds the ESD.
        const double env = esd.pulse.freq_sq_envelope(std::max(f_max, esd.pulse.envelope_valid_from())) *
                           esd.shape_sup;
        if (env > wo) {
            wo = env;
            fw = f_max;
        }
        p.worst_out.push_back(wo);
        p.f_worst.push_back(fw);
        const double pole = (esd.pulse.beta > 0.0)
                                ? (1.0 + esd.pulse.beta) / (4.0 * esd.pulse.beta * esd.pulse.t0)
                                : -1.0;
        const double cuts[] = {pole};
        p.inband.push_back(2.0 * quad_or_throw(ev, 0.0, lo, {grid.quad_tol, 40000},
                                               std::span<const double>(cuts, pole > 0 ? 1 : 0)));
    }
    return p;
}

}  // namespace detail

/// Definition-style mask fit: per constraint, (a) every sampled f >= alpha_i W
/// has Ehat(f) < V_i [Ehat]_max and (b) the in-band energy fraction is at
/// least eta_i. Margins are reported; "fits" means every margin is positive at
/// the sampled resolution. A second pass at double resolution guards against
/// coarse grids.
inline FitReport check_fit(const EsdProfile& esd, const SpectralMask& mask, FitGrid grid = {}) {
    mask.validate();
    double f_max = grid.f_max;
    if (f_max <= 0.0) {
        f_max = std::max(2.0 * mask.max_alpha_w(), 1.5 * esd.pulse.envelope_valid_from());
        // extend until the envelope bound alone settles the out-of-band check
        const double v_min = mask.constraints.front().v();
        const double peak_lb = esd(0.0);
        for (int i = 0; i < 60; ++i) {
            const double env = esd.pulse.freq_sq_envelope(std::max(f_max, esd.pulse.envelope_valid_from())) *
                               esd.shape_sup;
            if (env < 0.5 * v_min * peak_lb) break;
            f_max *= 1.6;
        }
    }

    const auto pass1 = detail::fit_pass(esd, mask, grid, f_max);
    FitGrid fine = grid;
    fine.points = 2 * grid.points;
    const auto pass2 = detail::fit_pass(esd, mask, fine, f_max);

    FitReport rep;
    rep.esd_max = pass2.esd_max;
    rep.f_at_max = pass2.f_at_max;
    bool coarse = std::abs(pass1.esd_max - pass2.esd_max) > grid.agree_rel * pass2.esd_max;

    double min_margin = std::numeric_limits<double>::infinity();
    rep.fits = true;
    for (std::size_t i = 0; i < mask.constraints.size(); ++i) {
        const auto& c = mask.constraints[i];
        FitReport::PerConstraint pc;
        pc.worst_out_of_band = pass2.worst_out[i];
        pc.f_worst = pass2.f_worst[i];
        pc.peak_margin = 1.0 - pc.worst_out_of_band / (c.v() * rep.esd_max);
        pc.inband_fraction = pass2.inband[i] / esd.total_energy;
        pc.energy_margin = pc.inband_fraction - c.eta;
        pc.peak_ok = pc.peak_margin > 0.0;
        pc.energy_ok = pc.energy_margin > 0.0;
        if (std::abs(pass1.worst_out[i] - pass2.worst_out[i]) >
            grid.agree_rel * std::max(pass2.worst_out[i], 1e-300)) {
            coarse = true;
        }
        rep.fits = rep.fits && pc.peak_ok && pc.energy_ok;
        const double m = std::min(pc.peak_margin, pc.energy_margin);
        if (m < min_margin) {
            min_margin = m;
            rep.binding = static_cast<int>(i);
        }
        rep.per.push_back(pc);
    }
    rep.status = coarse ? FitReport::Status::grid_too_coarse : FitReport::Status::ok;
    return rep;
}

struct ConcentrationReport {
    bool ok = false;
    double worst_pair_ratio = 0.0;  // max |column pair sum| / (MK)^{3/4}
    std::int64_t i1 = -1, i2 = -1;
    double worst_freq_ratio = 0.0;  // max |Ehat-Etilde| / (Etilde n (MK)^{-1/4}) over the grid
    double f_worst = 0.0;
};

/// Ensemble-concentration check: cross-term bound |sum_rows x_{i1} x_{i2}| <=
/// (MK)^{3/4} for every pair, plus the equivalent frequency-domain ratio on a
/// grid (the |phihat|^2 factor cancels, so zeros of the spectrum are benign).
inline ConcentrationReport concentration_check(const Codebook& cb, const RrcPulse& pulse,
                                               int grid_points = 2048) {
    if (cb.rows() < 2) throw ConfigError("concentration_check: need MK >= 2");
    ConcentrationReport rep;
    const double rows = static_cast<double>(cb.rows());
    const double bound = std::pow(rows, 0.75);

    // Column-pair sums over rows, via lag-aligned accumulation.
    std::vector<double> colsum;  // indexed (i1,i2), i1 < i2
    colsum.assign(static_cast<std::size_t>(cb.n) * (cb.n - 1) / 2, 0.0);
    for (std::uint64_t row = 0; row < cb.rows(); ++row) {
        std::size_t idx = 0;
        for (std::int64_t i1 = 0; i1 < cb.n; ++i1) {
            const int s1 = cb.sign(row, i1);
            for (std::int64_t i2 = i1 + 1; i2 < cb.n; ++i2, ++idx) {
                colsum[idx] += static_cast<double>(s1 * cb.sign(row, i2));
            }
        }
    }
    {
        std::size_t idx = 0;
        for (std::int64_t i1 = 0; i1 < cb.n; ++i1) {
            for (std::int64_t i2 = i1 + 1; i2 < cb.n; ++i2, ++idx) {
                const double r = std::abs(colsum[idx]) / bound;
                if (r > rep.worst_pair_ratio) {
                    rep.worst_pair_ratio = r;
                    rep.i1 = i1 + 1;
                    rep.i2 = i2 + 1;
                }
            }
        }
    }

    // Frequency-domain ratio on the grid: (Ehat - Etilde)/Etilde = cross/(MK n)
    // with cross the cosine-weighted pair sums (the |phihat|^2 factor cancels).
    // The trig polynomial has period 1/t0, so one period covers all f.
    const double n_d = static_cast<double>(cb.n);
    const double allowance = n_d / std::pow(rows, 0.25);  // Lemma-style relative slack
    const double f_hi = 1.0 / pulse.t0;
    for (int g = 0; g <= grid_points; ++g) {
        const double f = f_hi * static_cast<double>(g) / grid_points;
        double cross = 0.0;
        std::size_t idx = 0;
        for (std::int64_t i1 = 0; i1 < cb.n; ++i1) {
            for (std::int64_t i2 = i1 + 1; i2 < cb.n; ++i2, ++idx) {
                cross += 2.0 * colsum[idx] *
                         std::cos(2.0 * std::numbers::pi * static_cast<double>(i2 - i1) * pulse.t0 * f);
            }
        }
        const double rel_dev = std::abs(cross) / (rows * n_d);
        const double ratio = rel_dev / allowance;
        if (ratio > rep.worst_freq_ratio) {
            rep.worst_freq_ratio = ratio;
            rep.f_worst = f;
        }
    }
    rep.ok = rep.worst_pair_ratio <= 1.0 && rep.worst_freq_ratio <= 1.0;
    return rep;
}

}  // namespace covert
