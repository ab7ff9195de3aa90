// SPDX-License-Identifier: Apache-2.0
#pragma once

// Adaptive Gauss-Kronrod (G7,K15) quadrature on finite intervals. Callers
// integrating over the real line pick a truncation point from an analytic
// tail bound first (see RrcPulse::tail_cutoff); known branch points are
// passed as breakpoints and seed the subdivision.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "covert/errors.hpp"

namespace covert {

struct QuadResult {
    double value = 0.0;
    double error = 0.0;  // achieved error estimate
    std::size_t evaluations = 0;
    bool converged = false;
};

namespace detail {

// QUADPACK dqk15 abscissae/weights on [-1, 1].
inline constexpr double kKronrodX[8] = {
    0.9914553711208126, 0.9491079123427585, 0.8648644233597691, 0.7415311855993944,
    0.5860872354676911, 0.4058451513773972, 0.2077849550078985, 0.0};
inline constexpr double kKronrodW[8] = {
    0.0229353220105292, 0.0630920926299786, 0.1047900103222502, 0.1406532597155259,
    0.1690047266392679, 0.1903505780647854, 0.2044329400752989, 0.2094821410847278};
inline constexpr double kGaussW[4] = {
    0.1294849661688697, 0.2797053914892767, 0.3818300505051189, 0.4179591836734694};

template <class F>
inline void gk15(const F& f, double a, double b, double& value, double& err) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double kron = kKronrodW[7] * fc;
    double gauss = kGaussW[3] * fc;
    for (int i = 0; i < 7; ++i) {
        const double dx = h * kKronrodX[i];
        const double fsum = f(c - dx) + f(c + dx);
        kron += kKronrodW[i] * fsum;
        if (i % 2 == 1) gauss += kGaussW[i / 2] * fsum;
    }
    value = kron * h;
    err = std::abs((kron - gauss) * h);
}

}  // namespace detail

struct QuadOptions {
    double abs_tol = 1e-10;
    std::size_t max_intervals = 40000;
};

/// Adaptive quadrature of f over [a, b] with optional interior breakpoints.
template <class F>
QuadResult quad(const F& f, double a, double b, const QuadOptions& opt = {},
                std::span<const double> breakpoints = {}) {
    struct Panel {
        double a, b, value, err;
    };
    QuadResult out;
    if (a == b) {
        out.converged = true;
        return out;
    }

    std::vector<double> cuts;
    cuts.push_back(a);
    for (double x : breakpoints) {
        if (x > a && x < b) cuts.push_back(x);
    }
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());

    std::vector<Panel> work;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        Panel p{cuts[i], cuts[i + 1], 0.0, 0.0};
        detail::gk15(f, p.a, p.b, p.value, p.err);
        out.evaluations += 15;
        work.push_back(p);
    }

    auto total_err = [&] {
        double e = 0.0;
        for (const auto& p : work) e += p.err;
        return e;
    };

    while (total_err() > opt.abs_tol && work.size() < opt.max_intervals) {
        // Split the panel with the largest error estimate.
        std::size_t worst = 0;
        for (std::size_t i = 1; i < work.size(); ++i) {
            if (work[i].err > work[worst].err) worst = i;
        }
        Panel p = work[worst];
        const double mid = 0.5 * (p.a + p.b);
        if (mid <= p.a || mid >= p.b) break;  // interval exhausted at double resolution
        Panel left{p.a, mid, 0.0, 0.0}, right{mid, p.b, 0.0, 0.0};
        detail::gk15(f, left.a, left.b, left.value, left.err);
        detail::gk15(f, right.a, right.b, right.value, right.err);
        out.evaluations += 30;
        work[worst] = left;
        work.push_back(right);
    }

    double v = 0.0;
    for (const auto& p : work) v += p.value;
    out.value = v;
    out.error = total_err();
    out.converged = out.error <= opt.abs_tol;
    return out;
}

/// As quad(), but throws QuadratureError if the tolerance is not met.
template <class F>
double quad_or_throw(const F& f, double a, double b, const QuadOptions& opt = {},
                     std::span<const double> breakpoints = {}) {
    const QuadResult r = quad(f, a, b, opt, breakpoints);
    if (!r.converged) {
        throw QuadratureError("quadrature tolerance not met", r.error);
    }
    return r.value;
}

}  // namespace covert
