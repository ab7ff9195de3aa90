// SPDX-License-Identifier: Apache-2.0
#pragma once

// Root-raised-cosine carrier pulses with time and frequency roles swapped:
// strictly time-limited to [-t0/2, t0/2], unit energy, spectrum evaluated in
// closed form. The spectrum has removable singularities at f = 0 and at
// 4*beta*t0*f/(1+beta) = +-1; both are evaluated to full precision (stable
// sinc for the former, 4th-order series of numerator and denominator for the
// latter).

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "covert/errors.hpp"
#include "covert/quadrature.hpp"

namespace covert {

namespace detail {

inline double stable_sinc(double y) {
    if (std::abs(y) < 1e-4) {
        const double y2 = y * y;
        return 1.0 - y2 / 6.0 + y2 * y2 / 120.0;
    }
    return std::sin(y) / y;
}

// Sine integral for large arguments (x >= ~60), by the asymptotic expansion
// Si(x) = pi/2 - cos(x)/x * P(1/x^2) - sin(x)/x^2 * Q(1/x^2).
inline double si_large(double x) {
    const double ix2 = 1.0 / (x * x);
    const double p = 1.0 + ix2 * (-2.0 + ix2 * (24.0 + ix2 * (-720.0 + ix2 * 40320.0)));
    const double q = 1.0 + ix2 * (-6.0 + ix2 * (120.0 + ix2 * (-5040.0 + ix2 * 362880.0)));
    return std::numbers::pi / 2.0 - std::cos(x) / x * p - std::sin(x) / (x * x) * q;
}

}  // namespace detail

struct RrcPulse {
    double t0;
    double beta;

    RrcPulse(double t0_, double beta_) : t0(t0_), beta(beta_) {
        if (!(t0 > 0.0)) throw ConfigError("RrcPulse: t0 must be positive");
        if (!(beta >= 0.0 && beta <= 1.0)) throw ConfigError("RrcPulse: beta must lie in [0,1]");
    }

    double half_support() const { return 0.5 * t0; }

    /// Boundary between the flat and cosine branches (in |t|).
    double flat_edge() const { return (1.0 - beta) / (1.0 + beta) * 0.5 * t0; }

    /// phi(t). Zero outside [-t0/2, t0/2]; for beta = 0 only the flat branch exists.
    double time(double t) const {
        const double a = std::abs(t);
        if (a > 0.5 * t0) return 0.0;
        const double t1 = flat_edge();
        if (a <= t1) return std::sqrt((1.0 + beta) / t0);
        const double arg = std::numbers::pi * (1.0 + beta) / (t0 * beta) * (a - t1);
        const double radicand = (1.0 + std::cos(arg)) * (1.0 + beta) / (2.0 * t0);
        return std::sqrt(std::max(0.0, radicand));
    }

    /// phihat(f), continuous everywhere (even function of f).
    double freq(double f) const {
        const double x = std::abs(t0 * f);
        if (beta == 0.0) {
            return std::sqrt(t0) * detail::stable_sinc(std::numbers::pi * x);
        }
        const double scale = 4.0 * beta * std::sqrt(t0) / (std::numbers::pi * std::sqrt(1.0 + beta));
        const double x0 = (1.0 + beta) / (4.0 * beta);
        if (std::abs(x - x0) <= 1e-6 * x0) {
            return scale * pole_series_ratio(x - x0);
        }
        const double c1 = (1.0 - beta) / (1.0 + beta);
        const double num = std::cos(std::numbers::pi * x) +
                           (1.0 - beta) * std::numbers::pi / (4.0 * beta) *
                               detail::stable_sinc(c1 * std::numbers::pi * x);
        const double r = x / x0;
        const double den = 1.0 - r * r;
        return scale * num / den;
    }

    /// Unit-energy check helper: integral of phi^2 over the support.
    double time_energy(double abs_tol = 1e-12) const {
        const std::array<double, 2> cuts = {-flat_edge(), flat_edge()};
        return quad_or_throw([this](double t) { const double v = time(t); return v * v; },
                             -half_support(), half_support(), {abs_tol, 40000}, cuts);
    }

    /// Upper bound on |phihat(f)|^2 valid for all f >= envelope_valid_from().
    double freq_sq_envelope(double f) const {
        const double x = std::abs(t0 * f);
        if (beta == 0.0) {
            return 1.0 / (std::numbers::pi * std::numbers::pi * t0 * f * f);
        }
        const double scale = 4.0 * beta * std::sqrt(t0) / (std::numbers::pi * std::sqrt(1.0 + beta));
        const double x0 = (1.0 + beta) / (4.0 * beta);
        const double big_a = x0;  // (1+beta)/(4*beta)
        constexpr double kappa2 = 2.25;  // envelope valid from 1.5*x0 outward
        const double c = scale * x0 * x0 / (1.0 - 1.0 / kappa2);
        const double amp = c * (1.0 + big_a / x) / (x * x);
        return amp * amp;
    }

    double envelope_valid_from() const {
        if (beta == 0.0) return 0.5 / t0;  // past the first sinc zero
        return 1.5 * (1.0 + beta) / (4.0 * beta) / t0;
    }

    /// Two-sided bound on the out-of-band energy: integral over |f| > F of |phihat|^2.
    double tail_energy_bound(double f_cut) const {
        if (beta == 0.0) {
            return 2.0 / (std::numbers::pi * std::numbers::pi * t0 * f_cut);
        }
        const double x = t0 * f_cut;
        const double scale = 4.0 * beta * std::sqrt(t0) / (std::numbers::pi * std::sqrt(1.0 + beta));
        const double x0 = (1.0 + beta) / (4.0 * beta);
        constexpr double kappa2 = 2.25;
        const double c = scale * x0 * x0 / (1.0 - 1.0 / kappa2);
        const double amp1 = c * (1.0 + x0 / x);  // |phihat| <= amp1 / x^2 beyond x
        return 2.0 * amp1 * amp1 / (3.0 * x * x * x) / t0;
    }

    /// Two-sided tail energy estimate to be added to a finite-band quadrature.
    /// For beta = 0 this is the closed-form sinc tail (the beta = 0 spectrum
    /// decays only as 1/F, so a pure bound-based cutoff would be astronomical);
    /// for beta > 0 it is the midpoint of [0, bound].
    double tail_energy(double f_cut) const {
        if (beta == 0.0) {
            const double u = std::numbers::pi * t0 * f_cut;
            if (u < 60.0) return tail_energy_bound(f_cut);
            const double s = std::sin(u);
            const double one_sided =
                (std::numbers::pi / 2.0 - detail::si_large(2.0 * u) + s * s / u) / std::numbers::pi;
            return 2.0 * one_sided;
        }
        return 0.5 * tail_energy_bound(f_cut);
    }

    /// Cutoff F such that the residual uncertainty of quad([0,F]) + tail_energy(F)
    /// is below tol. For beta = 0 the uncertainty is the Si asymptotics' error,
    /// negligible once pi t0 F >= 150; for beta > 0 it is half the hard bound.
    double tail_cutoff(double tol) const {
        if (!(tol > 0.0)) throw ConfigError("tail_cutoff: tol must be positive");
        if (beta == 0.0) {
            return 150.0 / (std::numbers::pi * t0);
        }
        double f = std::max(envelope_valid_from(), 1.0 / t0);
        for (int i = 0; i < 64 && 0.5 * tail_energy_bound(f) > tol; ++i) f *= 1.5;
        // tighten back down
        double lo = envelope_valid_from(), hi = f;
        for (int i = 0; i < 60; ++i) {
            const double mid = 0.5 * (lo + hi);
            (0.5 * tail_energy_bound(mid) > tol ? lo : hi) = mid;
        }
        return hi;
    }

  private:
    // Ratio num/den expanded to 4th order about the removable pole x0; h = x - x0.
    double pole_series_ratio(double h) const {
        const double x0 = (1.0 + beta) / (4.0 * beta);
        const double big_a = (1.0 + beta) / (4.0 * beta);
        const double b = (1.0 - beta) / (1.0 + beta) * std::numbers::pi;
        const double pi = std::numbers::pi;

        // k-th derivatives of cos(pi x) + A sin(b x)/x at x0, k = 1..4.
        std::array<double, 5> dn{};
        std::array<double, 5> fact = {1.0, 1.0, 2.0, 6.0, 24.0};
        for (int k = 1; k <= 4; ++k) {
            double v = std::pow(pi, k) * std::cos(pi * x0 + k * pi / 2.0);
            double binom = 1.0;
            for (int j = 0; j <= k; ++j) {
                const int m = k - j;
                const double sin_term = std::pow(b, j) * std::sin(b * x0 + j * pi / 2.0);
                const double inv_term = ((m % 2 == 0) ? 1.0 : -1.0) * fact[m] * std::pow(x0, -(m + 1));
                v += big_a * binom * sin_term * inv_term;
                binom = binom * (k - j) / (j + 1.0);
            }
            dn[k] = v;
        }
        // den = 1 - (x/x0)^2: first two derivatives at x0, higher vanish.
        const double d1 = -2.0 / x0;
        const double d2 = -2.0 / (x0 * x0);
        const double num = dn[1] + dn[2] * h / 2.0 + dn[3] * h * h / 6.0 + dn[4] * h * h * h / 24.0;
        const double den = d1 + d2 * h / 2.0;
        return num / den;
    }
};

inline double rrc_time(const RrcPulse& p, double t) { return p.time(t); }
inline double rrc_freq(const RrcPulse& p, double f) { return p.freq(f); }

/// Time-shifted orthonormal pulse train g_i(t) = phi(t - (i-1/2) t0), i = 1..n.
struct ShiftedBasis {
    RrcPulse pulse;
    int n;

    ShiftedBasis(RrcPulse p, int n_) : pulse(p), n(n_) {
        if (n < 1) throw ConfigError("ShiftedBasis: n must be >= 1");
    }

    double g(int i, double t) const { return pulse.time(t - (i - 0.5) * pulse.t0); }
};

/// Gram matrix of inner products by quadrature; `spacing` defaults to the
/// orthonormal shift t0 and can be reduced to make the basis deliberately
/// non-orthogonal in tests.
inline std::vector<std::vector<double>> basis_gram(const RrcPulse& pulse, int n, double abs_tol,
                                                   double spacing = 0.0) {
    if (n < 1) throw ConfigError("basis_gram: n must be >= 1");
    if (spacing <= 0.0) spacing = pulse.t0;
    std::vector<std::vector<double>> gram(n, std::vector<double>(n, 0.0));
    for (int i = 1; i <= n; ++i) {
        for (int j = i; j <= n; ++j) {
            const double ci = (i - 0.5) * spacing;
            const double cj = (j - 0.5) * spacing;
            const double lo = std::max(ci, cj) - pulse.half_support();
            const double hi = std::min(ci, cj) + pulse.half_support();
            double v = 0.0;
            if (hi > lo) {
                const std::array<double, 4> cuts = {ci - pulse.flat_edge(), ci + pulse.flat_edge(),
                                                    cj - pulse.flat_edge(), cj + pulse.flat_edge()};
                v = quad_or_throw(
                    [&](double t) { return pulse.time(t - ci) * pulse.time(t - cj); }, lo, hi,
                    {abs_tol, 40000}, cuts);
            }
            gram[i - 1][j - 1] = v;
            gram[j - 1][i - 1] = v;
        }
    }
    return gram;
}

inline std::vector<std::vector<double>> basis_gram(const ShiftedBasis& basis, double abs_tol) {
    return basis_gram(basis.pulse, basis.n, abs_tol);
}

/// Pulse train sum_i x_i g_i(t) sampled on [0, n*t0] at the given rate.
inline std::vector<double> to_waveform(std::span<const double> x, const RrcPulse& pulse,
                                       double sample_rate) {
    if (sample_rate <= 0.0) throw ConfigError("to_waveform: sample_rate must be positive");
    const auto n = static_cast<std::int64_t>(x.size());
    const double duration = static_cast<double>(n) * pulse.t0;
    const std::size_t samples = static_cast<std::size_t>(std::llround(duration * sample_rate)) + 1;
    std::vector<double> out(samples, 0.0);
    for (std::size_t kk = 0; kk < samples; ++kk) {
        const double t = static_cast<double>(kk) / sample_rate;
        const auto i0 = static_cast<std::int64_t>(std::floor(t / pulse.t0));
        double v = 0.0;
        for (std::int64_t i = std::max<std::int64_t>(i0, 0); i <= std::min(i0 + 1, n - 1); ++i) {
            v += x[static_cast<std::size_t>(i)] * pulse.time(t - (i + 0.5) * pulse.t0);
        }
        out[kk] = v;
    }
    return out;
}

}  // namespace covert
