// SPDX-License-Identifier: Apache-2.0
#pragma once

// Standard-normal tail function Q and its inverse. Every headline formula in
// the library routes through these two, so Q is erfc-based (relative error at
// double rounding level on [-8, 8]) and the inverse polishes a rational
// initial guess with Newton steps against Q itself.

#include <cmath>
#include <limits>
#include <numbers>

#include "covert/errors.hpp"

namespace covert {

inline double normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

/// Q(x) = P(N(0,1) > x).
inline double gauss_q(double x) {
    return 0.5 * std::erfc(x / std::numbers::sqrt2);
}

namespace detail {

// Acklam's rational approximation to the normal quantile (abs error ~1e-9),
// used only as the Newton starting point.
inline double norm_quantile_seed(double p) {
    static constexpr double a[] = {-39.69683028665376, 220.9460984245205,  -275.9285104469687,
                                   138.3577518672690,  -30.66479806614716, 2.506628277459239};
    static constexpr double b[] = {-54.47609879822406, 161.5858368580409, -155.6989798598866,
                                   66.80131188771972,  -13.28068155288572};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838,
                                   -2.549732539343734,     4.374664141464968,      2.938163982698783};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996,
                                   3.754408661907416};
    const double plow = 0.02425, phigh = 1.0 - plow;
    double q, r;
    if (p < plow) {
        q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > phigh) {
        q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    q = p - 0.5;
    r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace detail

/// Q^{-1}(p) for p in (0, 1). Throws QuantileDomain outside.
inline double gauss_q_inv(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw QuantileDomain("gauss_q_inv: argument must lie in (0,1), got " + std::to_string(p));
    }
    // Q(x) = p  <=>  CDF(x) = 1-p.
    double x = detail::norm_quantile_seed(1.0 - p);
    for (int i = 0; i < 3; ++i) {
        const double err = gauss_q(x) - p;
        const double dq = -normal_pdf(x);
        if (dq == 0.0) break;
        const double step = err / dq;
        x -= step;
        if (std::abs(step) < 1e-15 * (1.0 + std::abs(x))) break;
    }
    return x;
}

}  // namespace covert
