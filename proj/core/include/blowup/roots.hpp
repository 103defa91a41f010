#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <utility>

#include "blowup/errors.hpp"

namespace blowup {

/// Stopping rule for monotone inversion: stop when |f(x) - target| <= value_tol
/// or the bracket shrinks to a few ulps.
struct InversionTolerance {
    double value_tol = 1e-12;
    int max_iterations = 400;
};

/// Solves f(x) = target on a bracket [lo, hi] where f is monotone (either
/// direction) and target lies between f(lo) and f(hi). Bisection, so it never
/// leaves the bracket.
template <class F>
double invert_monotone(const F& f, double target, double lo, double hi, InversionTolerance tol = {}) {
    if (hi < lo) std::swap(lo, hi);
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == target) return lo;
    if (fhi == target) return hi;
    const bool increasing = flo < fhi;
    if (increasing ? !(flo <= target && target <= fhi) : !(fhi <= target && target <= flo))
        throw NumericalError("invert_monotone: target is not bracketed");
    double best = std::fabs(flo - target) < std::fabs(fhi - target) ? lo : hi;
    double best_gap = std::fmin(std::fabs(flo - target), std::fabs(fhi - target));
    for (int it = 0; it < tol.max_iterations; ++it) {
        const double mid = lo + 0.5 * (hi - lo);
        if (!(mid > lo && mid < hi)) break;
        const double fm = f(mid);
        const double gap = std::fabs(fm - target);
        if (gap < best_gap) {
            best_gap = gap;
            best = mid;
        }
        if (gap <= tol.value_tol) return mid;
        if ((fm < target) == increasing) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return best;
}

/// Walks x_k = start + step * (2^k - 1), k = 1..max_doublings, and returns the first
/// x_k with f(x_k) >= target (f non-decreasing), or nullopt if none is found.
template <class F>
std::optional<double> bracket_by_doubling(const F& f, double target, double start, double step,
                                          int max_doublings = 64) {
    double scale = 1.0;
    for (int k = 1; k <= max_doublings; ++k) {
        scale *= 2.0;
        const double x = start + step * (scale - 1.0);
        if (f(x) >= target) return x;
    }
    return std::nullopt;
}

}  // namespace blowup
