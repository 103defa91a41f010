#include "blowup/improper.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "blowup/errors.hpp"

namespace blowup {

std::string_view to_string(ImproperKind kind) {
    switch (kind) {
        case ImproperKind::Convergent: return "Convergent";
        case ImproperKind::Divergent: return "Divergent";
        case ImproperKind::Unknown: return "Unknown";
    }
    return "Unknown";
}

ExtReal ImproperVerdict::extended_value() const {
    switch (kind) {
        case ImproperKind::Convergent: return ExtReal(value);
        case ImproperKind::Divergent: return ExtReal::pos_inf();
        case ImproperKind::Unknown: break;
    }
    throw DomainError("improper integral undecided (" + rule + ")");
}

namespace {

struct SlopeFit {
    double slope = std::numeric_limits<double>::quiet_NaN();
    bool stable = false;
    bool overflow = false;
    bool underflow = false;
};

double ls_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    const double n = static_cast<double>(xs.size());
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    return sxy / sxx;
}

SlopeFit fit_tail(const RealFunction& f, double lower, double span, int last_k, const ImproperOptions& o) {
    SlopeFit fit;
    const int pts = std::max(4, o.fit_points);
    std::vector<double> lx, lf;
    for (int k = last_k - pts + 1; k <= last_k; ++k) {
        if (k < 1) continue;
        const double scale = std::ldexp(1.0, k);
        const double x = lower + span * (scale - 1.0);
        const double fx = f(x);
        if (std::isinf(fx)) {
            fit.overflow = true;
            return fit;
        }
        if (!(fx > 0.0)) {
            fit.underflow = true;
            return fit;
        }
        lx.push_back(std::log(span * scale));
        lf.push_back(std::log(fx));
    }
    if (lx.size() < 4) return fit;
    fit.slope = ls_slope(lx, lf);
    const std::size_t h = lx.size() / 2;
    const double s1 = ls_slope({lx.begin(), lx.begin() + static_cast<long>(h)},
                               {lf.begin(), lf.begin() + static_cast<long>(h)});
    const double s2 = ls_slope({lx.begin() + static_cast<long>(h), lx.end()},
                               {lf.begin() + static_cast<long>(h), lf.end()});
    fit.stable = std::fabs(s1 - s2) <= o.slope_margin;
    return fit;
}

// Levin u-transform over a window of partial sums; index k is the absolute doubling count.
double levin_u(const std::vector<double>& partials, const std::vector<double>& increments, int terms) {
    const int total = static_cast<int>(partials.size());
    const int n = terms - 1;
    const int m = total - terms + 1;  // absolute index of the first term in the window
    constexpr double beta = 1.0;
    double num = 0.0, den = 0.0;
    double binom = 1.0;
    for (int j = 0; j <= n; ++j) {
        const int k = m + j;
        const double d = increments[static_cast<std::size_t>(k - 1)];
        if (d == 0.0) return std::numeric_limits<double>::quiet_NaN();
        const double omega = (beta + k) * d;
        const double c = ((j % 2) ? -1.0 : 1.0) * binom * std::pow((beta + k) / (beta + m + n), n - 1);
        num += c * partials[static_cast<std::size_t>(k - 1)] / omega;
        den += c / omega;
        binom = binom * (n - j) / (j + 1);
    }
    return num / den;
}

}  // namespace

ImproperVerdict classify_improper(const RealFunction& f, double lower, const ImproperOptions& o) {
    ImproperVerdict v;
    v.tail_slope = std::numeric_limits<double>::quiet_NaN();
    if (!std::isfinite(lower)) throw std::invalid_argument("classify_improper: lower limit must be finite");
    const double span = std::max(1.0, std::fabs(lower));
    v.breakpoints.push_back(lower);

    std::vector<double> increments;
    double total = 0.0;
    int streak = 0;
    double scale = 1.0;
    std::string quadrature_note;
    try {
        for (int k = 1; k <= o.max_doublings; ++k) {
            scale *= 2.0;
            const double x0 = v.breakpoints.back();
            const double x1 = lower + span * (scale - 1.0);
            QuadratureResult q;
            try {
                q = integrate(f, x0, x1, o.quadrature);
            } catch (const NumericalError& e) {
                // Far windows of oscillating integrands exhaust the budget; decide from the windows done.
                if (static_cast<int>(increments.size()) <= o.stable_doublings) throw;
                quadrature_note = std::string(" (windows stopped at x = ") + std::to_string(x0) + ": " + e.what() + ")";
                break;
            }
            v.breakpoints.push_back(x1);
            if (std::isinf(q.value) && q.value > 0) {
                v.partials.push_back(HUGE_VAL);
                v.kind = ImproperKind::Divergent;
                v.rule = "overflow";
                return v;
            }
            if (q.value < 0.0) {
                v.rule = "integrand is not positive on [" + std::to_string(x0) + ", " + std::to_string(x1) + "]";
                return v;
            }
            increments.push_back(q.value);
            total += q.value;
            v.partials.push_back(total);
            if (total > 1e300) {
                v.kind = ImproperKind::Divergent;
                v.rule = "overflow";
                return v;
            }
            streak = (q.value <= o.increment_tol * (1.0 + total)) ? streak + 1 : 0;
            if (streak >= o.stable_doublings && !o.tail_exponent_hint) {
                v.kind = ImproperKind::Convergent;
                v.value = total;
                v.rule = "increments";
                return v;
            }
        }
    } catch (const DomainError& e) {
        v.rule = std::string("evaluation failed: ") + e.what();
        return v;
    } catch (const NumericalError& e) {
        v.rule = std::string("quadrature failed: ") + e.what();
        return v;
    }

    const int last_k = static_cast<int>(increments.size());
    const double x_last = v.breakpoints.back();

    SlopeFit fit;
    try {
        fit = fit_tail(f, lower, span, last_k, o);
    } catch (const DomainError& e) {
        v.rule = std::string("evaluation failed: ") + e.what();
        return v;
    }
    v.tail_slope = fit.slope;

    if (o.tail_exponent_hint) {
        const double p = *o.tail_exponent_hint;
        v.rule = "hint";
        if (p > 1.0) {
            v.kind = ImproperKind::Convergent;
            v.value = total + x_last * f(x_last) / (p - 1.0);
        } else {
            v.kind = ImproperKind::Divergent;
        }
        return v;
    }

    if (fit.overflow) {
        v.kind = ImproperKind::Divergent;
        v.rule = "overflow";
        return v;
    }
    if (fit.underflow) {
        v.kind = ImproperKind::Convergent;
        v.value = total;
        v.rule = "increments";
        return v;
    }

    if (fit.stable && fit.slope >= -1.0 + o.slope_margin) {
        v.kind = ImproperKind::Divergent;
        v.rule = "tail-slope";
        return v;
    }

    // Increments that no longer shrink: the partial integrals grow at least linearly in log x.
    if (last_k > o.stable_doublings) {
        bool flat = true;
        for (int k = last_k - o.stable_doublings; k < last_k; ++k) {
            const double prev = increments[static_cast<std::size_t>(k - 1)];
            const double cur = increments[static_cast<std::size_t>(k)];
            if (!(cur >= (1.0 - 1e-3) * prev)) flat = false;
        }
        if (flat && increments.back() > 0.0) {
            v.kind = ImproperKind::Divergent;
            v.rule = "non-decaying-increments" + quadrature_note;
            return v;
        }
    }

    if (fit.stable && fit.slope <= -1.0 - o.slope_margin) {
        v.kind = ImproperKind::Convergent;
        const int terms = std::min(o.levin_terms, last_k - 1);
        const double l1 = levin_u(v.partials, increments, terms);
        const double l2 = levin_u(v.partials, increments, terms - 2);
        if (std::isfinite(l1) && std::isfinite(l2) && l1 >= total &&
            std::fabs(l1 - l2) <= 1e-3 * (1.0 + std::fabs(l1))) {
            v.value = l1;
            v.rule = "levin-extrapolation";
        } else {
            const double p = -fit.slope;
            v.value = total + x_last * f(x_last) / (p - 1.0);
            v.rule = "power-tail";
        }
        return v;
    }

    v.rule = "undecided: tail slope " + std::to_string(fit.slope) + (fit.stable ? "" : " (unstable fit)") +
             quadrature_note;
    return v;
}

ImproperVerdict classify_improper(const FunctionExpr& f, double lower, std::optional<double> hint) {
    ImproperOptions o;
    o.tail_exponent_hint = hint;
    return classify_improper([&f](double x) { return f(x); }, lower, o);
}

ImproperVerdict classify_toward(const RealFunction& g, double from, const ExtReal& end, const ImproperOptions& opts) {
    if (!std::isfinite(from)) throw std::invalid_argument("classify_toward: start must be finite");
    if (end.is_pos_inf()) return classify_improper(g, from, opts);
    if (end.is_neg_inf()) {
        auto reflected = [&g](double s) { return g(-s); };
        return classify_improper(reflected, -from, opts);
    }
    const double e = end.value();
    if (e == from) throw std::invalid_argument("classify_toward: empty interval");
    if (e > from) {
        // z = e - 1/u, dz = du/u^2, u in [1/(e - from), inf)
        auto mapped = [&g, e](double u) {
            const double gz = g(e - 1.0 / u);
            return gz == 0.0 ? 0.0 : gz / (u * u);
        };
        return classify_improper(mapped, 1.0 / (e - from), opts);
    }
    auto mapped = [&g, e](double u) {
        const double gz = g(e + 1.0 / u);
        return gz == 0.0 ? 0.0 : gz / (u * u);
    };
    return classify_improper(mapped, 1.0 / (from - e), opts);
}

}  // namespace blowup
