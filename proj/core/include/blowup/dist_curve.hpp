#pragma once

#include <optional>
#include <string>
#include <vector>

namespace blowup {

/// A distribution function of an explosion time sampled on a time grid.
///
/// This is the common currency of the analytic, Monte Carlo and PDE routes.
struct DistCurve {
    std::vector<double> times;
    std::vector<double> cdf;
    /// Name of the closed form used, when the curve came from one.
    std::optional<std::string> closed_form;
    /// Per-point binomial standard errors (Monte Carlo curves only).
    std::vector<double> std_errors;
    /// Fraction of samples censored at the horizon (Monte Carlo curves only).
    std::optional<double> censored_mass;
    /// The CDF's value at the end of the grid.
    double total_mass = 0.0;

    /// Throws std::invalid_argument if the grid is not increasing, values leave
    /// [0, 1], or the CDF decreases by more than `tol`.
    void validate(double tol = 1e-12) const;

    /// Linear interpolation; clamps to the end values outside the grid.
    double at(double t) const;
};

/// Largest |a(t) - b(t)| over the points of a's grid, b interpolated.
double sup_gap(const DistCurve& a, const DistCurve& b);

/// Header-comment lines ("# key=value") are written first; columns are `t,cdf`
/// plus `se` when standard errors are present. 17 significant digits.
std::string to_csv(const DistCurve& curve, const std::vector<std::pair<std::string, std::string>>& header = {});

/// Reads the format written by to_csv (comment lines are skipped).
DistCurve dist_curve_from_csv(const std::string& text);

/// JSON object {times, cdf, closed_form, total_mass, std_errors?, censored_mass?}.
std::string to_json(const DistCurve& curve);

}  // namespace blowup
