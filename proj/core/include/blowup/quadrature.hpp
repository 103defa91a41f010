#pragma once

#include <functional>

namespace blowup {

using RealFunction = std::function<double(double)>;

struct QuadratureOptions {
    double abs_tol = 1e-10;
    double rel_tol = 1e-12;
    int max_intervals = 4000;
};

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
    int intervals = 0;
    int evaluations = 0;
};

/// Globally adaptive Gauss-Kronrod (7/15) quadrature of f over [a, b].
///
/// The integrand is never evaluated at the endpoints, so integrable endpoint
/// singularities are fine. If the integrand returns +-inf anywhere, the result
/// carries that infinity (overflow is divergence evidence, not a crash).
/// Throws NumericalError when the error target is not met within
/// `max_intervals` subdivisions. If b < a the result is negated.
QuadratureResult integrate(const RealFunction& f, double a, double b, const QuadratureOptions& opts = {});

/// Integral over [a, inf) through the map x = a + (1 - s)/s, s in (0, 1].
QuadratureResult integrate_to_infinity(const RealFunction& f, double a, const QuadratureOptions& opts = {});

}  // namespace blowup
