#include "blowup/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "blowup/errors.hpp"
#include "blowup/quadrature.hpp"
#include "blowup/roots.hpp"

namespace blowup {

namespace {

constexpr QuadratureOptions kPsiQuad{1e-12, 1e-12, 4000};

struct Sample {
    double z;
    bool far;  // geometric probe toward an infinite end; sigma may underflow there
};

// Points strictly inside (x1, x2) that cover both ends geometrically and the bulk uniformly.
std::vector<Sample> interior_samples(double xi, const ExtReal& x1, const ExtReal& x2) {
    std::vector<Sample> pts{{xi, false}};
    const double span = std::max(1.0, std::fabs(xi));
    auto toward = [&](const ExtReal& end, double dir) {
        if (end.is_finite()) {
            const double gap = std::fabs(end.value() - xi);
            for (int k = 1; k <= 40; ++k) pts.push_back({xi + dir * gap * (1.0 - std::ldexp(1.0, -k)), false});
            for (int k = 1; k < 64; ++k) pts.push_back({xi + dir * gap * k / 64.0, false});
        } else {
            for (int k = 1; k < 64; ++k) pts.push_back({xi + dir * span * k / 16.0, false});
            for (int k = 1; k <= 40; ++k) pts.push_back({xi + dir * span * (std::ldexp(1.0, k) - 1.0), true});
        }
    };
    toward(x2, 1.0);
    toward(x1, -1.0);
    return pts;
}

// The constructor rules out zeros in the bulk, so a zero here is underflow far out and 1/sigma is +-inf.
double inverse_sigma(const FunctionExpr& sigma, double z) {
    return 1.0 / sigma(z);
}

}  // namespace

TransformProblem::TransformProblem(FunctionExpr sigma, FunctionExpr h, double xi, ExtReal x1, ExtReal x2)
    : sigma_(std::move(sigma)), h_(std::move(h)), xi_(xi), x1_(x1), x2_(x2) {
    if (!std::isfinite(xi)) throw std::invalid_argument("TransformProblem: xi must be finite");
    if (!(x1 < ExtReal(xi) && ExtReal(xi) < x2))
        throw std::invalid_argument("TransformProblem: xi must lie strictly inside (x1, x2)");
    int sign = 0;
    for (const auto& [z, far] : interior_samples(xi, x1, x2)) {
        if (!(x1 < ExtReal(z) && ExtReal(z) < x2)) continue;
        double s = 0.0;
        try {
            s = sigma_(z);
        } catch (const DomainError& e) {
            throw std::invalid_argument(std::string("TransformProblem: sigma undefined inside the domain: ") +
                                        e.what());
        }
        if (far && (s == 0.0 || !std::isfinite(s))) continue;
        if (s == 0.0)
            throw std::invalid_argument("TransformProblem: sigma vanishes at " + std::to_string(z) +
                                        " inside the domain");
        const int sz = s > 0.0 ? 1 : -1;
        if (sign == 0) sign = sz;
        if (sz != sign)
            throw std::invalid_argument("TransformProblem: sigma changes sign near " + std::to_string(z));
    }
    sign_ = sign;
}

BarrierPair::BarrierPair(ExtReal left, ExtReal right) : l(left), r(right) {
    if (!(l < ExtReal(0.0) && ExtReal(0.0) < r))
        throw std::invalid_argument("BarrierPair: need l < 0 < r, got (" + l.to_string() + ", " + r.to_string() + ")");
}

// ---------------------------------------------------------------------------
// Time change

double accumulate_H(const FunctionExpr& h, double t) {
    if (!(t >= 0.0)) throw std::invalid_argument("accumulate_H: t must be non-negative");
    if (auto c = h.constant_value()) return (*c) * (*c) * t;
    try {
        return integrate([&h](double s) { const double v = h(s); return v * v; }, 0.0, t, {1e-10, 1e-12, 4000}).value;
    } catch (const NumericalError& e) {
        throw NumericalError("accumulate_H: h^2 is not integrable on [0, " + std::to_string(t) + "]: " + e.what());
    }
}

double invert_H(const FunctionExpr& h, double v) {
    TimeChange tc(h, 1.0, 64);
    return tc.inverse(v);
}

TimeChange::TimeChange(FunctionExpr h, double horizon, int cells) : h_(std::move(h)), horizon_(horizon) {
    if (!(horizon > 0.0)) throw std::invalid_argument("TimeChange: horizon must be positive");
    if (cells < 1) throw std::invalid_argument("TimeChange: need at least one cell");
    if (auto c = h_.constant_value()) const_rate_ = (*c) * (*c);
    nodes_.resize(static_cast<std::size_t>(cells) + 1);
    cumulative_.assign(nodes_.size(), 0.0);
    for (int i = 0; i <= cells; ++i) nodes_[static_cast<std::size_t>(i)] = horizon * i / cells;
    nodes_.back() = horizon;
    for (std::size_t i = 1; i < nodes_.size(); ++i)
        cumulative_[i] = cumulative_[i - 1] + cell_integral(nodes_[i - 1], nodes_[i]);
}

double TimeChange::cell_integral(double a, double b) const {
    if (const_rate_) return *const_rate_ * (b - a);
    try {
        return integrate([this](double s) { const double v = h_(s); return v * v; }, a, b, {1e-13, 1e-13, 4000})
            .value;
    } catch (const NumericalError& e) {
        throw NumericalError(std::string("TimeChange: h^2 is not integrable: ") + e.what());
    }
}

double TimeChange::operator()(double t) const {
    if (!(t >= 0.0)) throw std::invalid_argument("TimeChange: t must be non-negative");
    if (const_rate_) return *const_rate_ * t;
    if (t >= horizon_) return cumulative_.back() + cell_integral(horizon_, t);
    const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - nodes_.begin()) - 1;
    return cumulative_[i] + cell_integral(nodes_[i], t);
}

double TimeChange::inverse_in_cell(std::size_t cell, double v) const {
    double lo = nodes_[cell];
    double hi = nodes_[cell + 1];
    const double base = cumulative_[cell];
    const double tol = 1e-11 * (1.0 + v);
    double t = lo + (hi - lo) * (v - base) / std::max(cumulative_[cell + 1] - base, 1e-300);
    t = std::clamp(t, lo, hi);
    for (int it = 0; it < 200; ++it) {
        const double g = base + cell_integral(nodes_[cell], t) - v;
        if (std::fabs(g) <= tol) return t;
        if (g > 0.0) hi = t; else lo = t;
        double rate = 0.0;
        try {
            const double hv = h_(t);
            rate = hv * hv;
        } catch (const DomainError&) {
        }
        double next = rate > 0.0 ? t - g / rate : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (next == t || hi - lo <= 4e-16 * std::max(1.0, std::fabs(t))) return next;
        t = next;
    }
    return t;
}

double TimeChange::inverse(double v) const {
    if (!(v >= 0.0)) throw std::invalid_argument("TimeChange::inverse: v must be non-negative");
    if (v == 0.0) return 0.0;
    if (const_rate_) {
        if (*const_rate_ == 0.0) throw DomainError("time change is identically zero; H never reaches " + std::to_string(v));
        return v / *const_rate_;
    }
    if (v <= cumulative_.back()) {
        const auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), v);
        std::size_t i = static_cast<std::size_t>(it - cumulative_.begin());
        if (i == 0) i = 1;
        return inverse_in_cell(i - 1, v);
    }
    // Beyond the table: doubling windows past the horizon, then bisection.
    double t0 = horizon_;
    double h0 = cumulative_.back();
    for (int k = 0; k < 64; ++k) {
        const double t1 = 2.0 * t0;
        const double h1 = h0 + cell_integral(t0, t1);
        if (h1 >= v) {
            const double t = invert_monotone([&](double s) { return h0 + cell_integral(t0, s); }, v, t0, t1,
                                             {1e-11 * (1.0 + v), 400});
            return t;
        }
        t0 = t1;
        h0 = h1;
    }
    throw DomainError("H saturates at about " + std::to_string(h0) + " and never reaches " + std::to_string(v));
}

// ---------------------------------------------------------------------------
// Transform

double psi(const TransformProblem& p, double x) {
    if (!(p.x1() < ExtReal(x) && ExtReal(x) < p.x2()))
        throw std::invalid_argument("psi: x must lie inside (x1, x2)");
    if (x == p.xi()) return 0.0;
    const FunctionExpr& sigma = p.sigma();
    return integrate([&sigma](double z) { return inverse_sigma(sigma, z); }, p.xi(), x, kPsiQuad).value;
}

PsiLimits psi_limits(const TransformProblem& p, const PsiHints& hints) {
    const FunctionExpr& sigma = p.sigma();
    auto magnitude = [&sigma](double z) { return std::fabs(inverse_sigma(sigma, z)); };

    ImproperOptions left_opts;
    left_opts.tail_exponent_hint = hints.toward_x1;
    ImproperOptions right_opts;
    right_opts.tail_exponent_hint = hints.toward_x2;

    PsiLimits out;
    out.toward_x1 = classify_toward(magnitude, p.xi(), p.x1(), left_opts);
    out.toward_x2 = classify_toward(magnitude, p.xi(), p.x2(), right_opts);
    if (out.toward_x1.unknown() || out.toward_x2.unknown()) return out;

    // Psi(x2) = sign * |integral to x2|, Psi(x1) = -sign * |integral to x1|.
    const ExtReal at_x2 = ExtReal(static_cast<double>(p.sigma_sign())) * out.toward_x2.extended_value();
    const ExtReal at_x1 = ExtReal(static_cast<double>(-p.sigma_sign())) * out.toward_x1.extended_value();
    out.barriers.emplace(min(at_x1, at_x2), max(at_x1, at_x2));
    return out;
}

double psi_inverse(const TransformProblem& p, const BarrierPair& barriers, double y) {
    if (!(barriers.l < ExtReal(y) && ExtReal(y) < barriers.r))
        throw std::invalid_argument("psi_inverse: y must lie inside (l, r)");
    if (y == 0.0) return p.xi();
    const bool rightward = (y > 0.0) == (p.sigma_sign() > 0);
    const ExtReal& end = rightward ? p.x2() : p.x1();
    const double dir = rightward ? 1.0 : -1.0;
    const double xi = p.xi();
    const double target = std::fabs(y);
    auto distance = [&](double x) { return std::fabs(psi(p, x)); };

    auto candidate = [&](int k) {
        if (end.is_finite()) return xi + (end.value() - xi) * (1.0 - std::ldexp(1.0, -k));
        return xi + dir * std::max(1.0, std::fabs(xi)) * (std::ldexp(1.0, k) - 1.0);
    };
    double inner = xi;
    for (int k = 1; k <= 60; ++k) {
        const double outer = candidate(k);
        if (outer == inner) break;
        if (distance(outer) >= target) {
            return invert_monotone([&](double x) { return distance(x); }, target, inner, outer, {1e-12, 400});
        }
        inner = outer;
    }
    throw NumericalError("psi_inverse: could not bracket y = " + std::to_string(y));
}

// ---------------------------------------------------------------------------
// Barrier laws

double phi_tail(double x) {
    if (std::isinf(x)) return x > 0 ? 0.0 : 2.0;
    if (x >= 0.0) return std::erfc(x / std::numbers::sqrt2);
    return 2.0 - std::erfc(-x / std::numbers::sqrt2);
}

double one_barrier_cdf(double m, double h_val) {
    if (!(m > 0.0)) throw std::invalid_argument("one_barrier_cdf: barrier must be positive");
    if (!(h_val >= 0.0)) throw std::invalid_argument("one_barrier_cdf: clock must be non-negative");
    if (h_val == 0.0) return 0.0;
    if (std::isinf(m)) return 0.0;
    if (std::isinf(h_val)) return 1.0;
    return phi_tail(m / std::sqrt(h_val));
}

SeriesValue two_barrier_cdf(const BarrierPair& barriers, double h_val, double tol) {
    if (!barriers.both_finite()) throw std::invalid_argument("two_barrier_cdf: both barriers must be finite");
    if (!(h_val > 0.0)) throw std::invalid_argument("two_barrier_cdf: clock must be positive");
    if (!(tol > 0.0)) throw std::invalid_argument("two_barrier_cdf: tolerance must be positive");
    const double r = barriers.r.value();
    const double a = -barriers.l.value();
    const double width = r + a;
    if (std::isinf(h_val)) return {1.0, 0.0, 0};

    // Survival decays like (4/pi) exp(-pi^2 H / (2 w^2)); past that point the image series
    // needs millions of groups to say the same thing.
    const double survival_bound = 4.0 / std::numbers::pi * std::exp(-std::numbers::pi * std::numbers::pi * h_val /
                                                                    (2.0 * width * width));
    if (survival_bound < tol) return {1.0, survival_bound, 0};

    // Exit density sum_k (-1)^k c_k / sqrt(2 pi H^3) exp(-c_k^2 / 2H), c_k = r + k w, integrated
    // in H gives sign(c_k) Phi(|c_k| / sqrt(H)). Grouping k = n with k = -(n+1) yields
    // (-1)^n [Phi((r + n w)/sqrt H) + Phi((a + n w)/sqrt H)], alternating and decreasing.
    const double root = std::sqrt(h_val);
    auto group = [&](int n) { return phi_tail((r + n * width) / root) + phi_tail((a + n * width) / root); };
    SeriesValue out;
    double sum = 0.0;
    for (int n = 0;; ++n) {
        const double g = group(n);
        sum += (n % 2 == 0) ? g : -g;
        out.groups = n + 1;
        const double next = group(n + 1);
        if (next < tol) {
            out.error_bound = next;
            break;
        }
        if (n > 50'000'000) throw NumericalError("two_barrier_cdf: series did not reach tolerance");
    }
    out.value = std::clamp(sum, 0.0, 1.0);
    return out;
}

TransformReport transform_explosion_verdict(const TransformProblem& p, const PsiHints& hints,
                                            std::optional<double> clock_tail_hint) {
    TransformReport rep;
    const FunctionExpr& h = p.h();
    ImproperOptions clock_opts;
    clock_opts.tail_exponent_hint = clock_tail_hint;
    rep.clock = classify_improper([&h](double s) { const double v = h(s); return v * v; }, 0.0, clock_opts);
    rep.limits = psi_limits(p, hints);

    auto& ev = rep.verdict.evidence;
    ev.push_back("toward x1: " + std::string(to_string(rep.limits.toward_x1.kind)) + " (" + rep.limits.toward_x1.rule + ")");
    ev.push_back("toward x2: " + std::string(to_string(rep.limits.toward_x2.kind)) + " (" + rep.limits.toward_x2.rule + ")");
    ev.push_back("H(inf): " + std::string(to_string(rep.clock.kind)) + " (" + rep.clock.rule + ")");

    if (!rep.limits.barriers) {
        rep.verdict.kind = VerdictKind::Unknown;
        ev.push_back("barrier classification undecided; supply a tail-exponent hint");
        return rep;
    }
    const BarrierPair& bp = *rep.limits.barriers;
    ev.push_back("barriers: l=" + bp.l.to_string() + ", r=" + bp.r.to_string());
    if (bp.both_infinite()) {
        rep.verdict.kind = VerdictKind::NoExplosion;
        return rep;
    }
    if (rep.clock.divergent()) {
        rep.verdict.kind = VerdictKind::ExplodesFiniteTime;
        if (bp.r.is_finite()) ev.push_back("explosion through x" + std::string(p.sigma_sign() > 0 ? "2" : "1"));
        if (bp.l.is_finite()) ev.push_back("explosion through x" + std::string(p.sigma_sign() > 0 ? "1" : "2"));
        return rep;
    }
    rep.verdict.kind = VerdictKind::Unknown;
    if (rep.clock.convergent()) {
        const double h_inf = rep.clock.value;
        double prob = 0.0;
        if (h_inf > 0.0) {
            if (bp.both_finite()) {
                prob = two_barrier_cdf(bp, h_inf).value;
            } else {
                const double m = bp.r.is_finite() ? bp.r.value() : -bp.l.value();
                prob = one_barrier_cdf(m, h_inf);
            }
        }
        rep.verdict.explosion_probability = prob;
        ev.push_back("H(inf) = " + std::to_string(h_inf) + " is finite: explosion only with probability " +
                     std::to_string(prob));
    } else {
        ev.push_back("H(inf) undecided; supply a clock tail-exponent hint");
    }
    return rep;
}

DistCurve analytic_distribution(const TransformProblem& p, const BarrierPair& barriers,
                                const std::vector<double>& times) {
    if (barriers.both_infinite()) throw DomainError("no explosion; no distribution");
    if (times.empty()) throw std::invalid_argument("analytic_distribution: empty time grid");
    DistCurve c;
    c.times = times;
    c.cdf.reserve(times.size());
    const TimeChange clock(p.h(), std::max(times.back(), 1e-12), 1024);
    for (double t : times) {
        const double hv = clock(t);
        double v = 0.0;
        if (hv > 0.0) {
            if (barriers.both_finite()) {
                v = two_barrier_cdf(barriers, hv).value;
            } else {
                const double m = barriers.r.is_finite() ? barriers.r.value() : -barriers.l.value();
                v = one_barrier_cdf(m, hv);
            }
        }
        c.cdf.push_back(v);
    }
    c.closed_form = barriers.both_finite() ? "two_barrier_image_series" : "one_barrier_phi";
    c.total_mass = c.cdf.back();
    return c;
}

}  // namespace blowup
