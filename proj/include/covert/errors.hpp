// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace covert {

/// Bad user input: malformed config, out-of-domain argument, invalid index.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Adaptive quadrature could not reach the requested tolerance.
struct QuadratureError : std::runtime_error {
    QuadratureError(const std::string& what, double achieved)
        : std::runtime_error(what + " (achieved error " + std::to_string(achieved) + ")"),
          achieved_error(achieved) {}
    double achieved_error;
};

/// No pulse duration satisfies the mask constraints.
struct InfeasibleMask : std::runtime_error {
    explicit InfeasibleMask(const std::string& what) : std::runtime_error(what) {}
};

/// The slackness-tightened problem has no feasible duration in the search bracket.
struct SlacknessTooLarge : std::runtime_error {
    explicit SlacknessTooLarge(const std::string& what) : std::runtime_error(what) {}
};

/// A materialization or per-sample cost cap was exceeded.
struct BudgetExceeded : std::runtime_error {
    explicit BudgetExceeded(const std::string& what) : std::runtime_error(what) {}
};

/// Argument of the normal quantile left its valid range.
struct QuantileDomain : std::runtime_error {
    explicit QuantileDomain(const std::string& what) : std::runtime_error(what) {}
};

/// Every sub-code exceeded the error cutoff; inputs are inconsistent.
struct NoGoodSubcode : std::runtime_error {
    explicit NoGoodSubcode(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace covert
