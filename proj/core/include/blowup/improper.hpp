#pragma once

#include <optional>
#include <string>
#include <vector>

#include "blowup/expr.hpp"
#include "blowup/ext_real.hpp"
#include "blowup/quadrature.hpp"

namespace blowup {

enum class ImproperKind { Convergent, Divergent, Unknown };

std::string_view to_string(ImproperKind kind);

/// Outcome of classifying an improper integral of a positive function, with
/// the partial-integral trace that supports it.
struct ImproperVerdict {
    ImproperKind kind = ImproperKind::Unknown;
    /// Limit of the partial integrals; only meaningful when Convergent.
    double value = 0.0;
    /// Which rule decided: "increments", "hint", "tail-slope", "non-decaying-increments",
    /// "overflow", "levin-extrapolation", "power-tail", or a failure reason.
    std::string rule;
    /// x_0 = lower, x_k = lower + span * (2^k - 1).
    std::vector<double> breakpoints;
    /// partials[k-1] = integral over [x_0, x_k].
    std::vector<double> partials;
    /// Least-squares slope of log f against log x over the last doublings (NaN if unavailable).
    double tail_slope = 0.0;

    bool convergent() const noexcept { return kind == ImproperKind::Convergent; }
    bool divergent() const noexcept { return kind == ImproperKind::Divergent; }
    bool unknown() const noexcept { return kind == ImproperKind::Unknown; }

    /// Convergent -> value, Divergent -> +inf; throws DomainError when Unknown.
    ExtReal extended_value() const;
};

struct ImproperOptions {
    int max_doublings = 40;
    double increment_tol = 1e-10;
    int stable_doublings = 5;
    double slope_margin = 0.05;
    int fit_points = 8;
    int levin_terms = 10;
    /// Known tail exponent p of f ~ c * s^-p; replaces the heuristics with the p > 1 test.
    std::optional<double> tail_exponent_hint;
    QuadratureOptions quadrature{1e-14, 1e-12, 4000};
};

/// Decides whether the integral of a positive f over [lower, inf) is finite.
///
/// Partial integrals are accumulated over doubling windows. The rules, in order:
/// increments below increment_tol * (1 + total) for stable_doublings consecutive
/// windows -> Convergent; a tail-exponent hint -> analytic p-test; overflow,
/// a stable tail slope >= -1 + margin, or increments that stop decaying ->
/// Divergent; a stable tail slope <= -1 - margin -> Convergent with a
/// Levin-extrapolated limit; anything else -> Unknown.
ImproperVerdict classify_improper(const RealFunction& f, double lower, const ImproperOptions& opts = {});
ImproperVerdict classify_improper(const FunctionExpr& f, double lower,
                                  std::optional<double> tail_exponent_hint = std::nullopt);

/// Classifies the integral of a positive g over the interval between `from` and
/// `end` (either side, finite or infinite end). A finite end is mapped to
/// infinity by z = end -+ 1/u so the same doubling rules apply.
ImproperVerdict classify_toward(const RealFunction& g, double from, const ExtReal& end,
                                const ImproperOptions& opts = {});

}  // namespace blowup
