#include "blowup/osgood.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <stdexcept>

#include "blowup/errors.hpp"
#include "blowup/quadrature.hpp"
#include "blowup/roots.hpp"
#include "json.hpp"

namespace blowup {

namespace {

constexpr QuadratureOptions kQuad{1e-12, 1e-12, 4000};

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

RealFunction reciprocal(const FunctionExpr& b) {
    return [b](double z) {
        const double v = b(z);
        if (v < 0.0) throw DomainError("b is negative at " + num(z));
        return 1.0 / v;
    };
}

// Smallest x >= start with `acc(x) = target`, where acc is a non-decreasing running integral
// built window by window over start + span (2^k - 1).
template <class Window>
std::optional<double> walk_and_invert(const Window& window, double start, double target, int max_doublings) {
    const double span = std::max(1.0, std::fabs(start));
    double lo = start;
    double acc = 0.0;
    double scale = 1.0;
    for (int k = 1; k <= max_doublings; ++k) {
        scale *= 2.0;
        const double hi = start + span * (scale - 1.0);
        const double piece = window(lo, hi);
        if (acc + piece >= target) {
            const double base = acc;
            const double from = lo;
            return invert_monotone([&](double x) { return base + window(from, x); }, target, lo, hi,
                                   {1e-14 * (1.0 + target), 400});
        }
        acc += piece;
        lo = hi;
    }
    return std::nullopt;
}

}  // namespace

void OsgoodProblem::validate() const {
    if (!(ExtReal(xi) > l)) throw std::invalid_argument("OsgoodProblem: need xi > l");
    if (const auto* bn = std::get_if<BoundedNoise>(&g); bn && !(bn->inf <= bn->sup))
        throw std::invalid_argument("OsgoodProblem: bounded noise needs inf g <= sup g");
    if (const auto* pn = std::get_if<PathNoise>(&g); pn && pn->times.size() != pn->values.size())
        throw std::invalid_argument("OsgoodProblem: noise path times and values differ in length");
    if (!(eta > 0.0) || !(eta_tilde > 0.0)) throw std::invalid_argument("OsgoodProblem: eta and eta_tilde must be positive");
}

double integral_A(const FunctionExpr& a, double t0, double x) {
    if (!(t0 <= x)) throw std::invalid_argument("integral_A: need t0 <= x");
    if (auto c = a.constant_value()) return *c * (x - t0);
    return integrate([&a](double s) { return a(s); }, t0, x, kQuad).value;
}

double integral_B(const FunctionExpr& b, double xi, double x) {
    if (x == xi) return 0.0;
    const double lo = std::min(xi, x);
    const double hi = std::max(xi, x);
    auto inv = [&b](double z) {
        const double v = b(z);
        if (!(v > 0.0)) throw DomainError("b vanishes or is negative at " + num(z));
        return 1.0 / v;
    };
    for (double z : {lo, hi}) {
        const double v = b(z);
        if (!(v > 0.0)) throw DomainError("b vanishes or is negative at " + num(z));
    }
    const double v = integrate(inv, lo, hi, kQuad).value;
    return x > xi ? v : -v;
}

double ode_solve(const OsgoodProblem& p, double t0, double x0, double t) {
    if (!(ExtReal(x0) > p.l)) throw std::invalid_argument("ode_solve: need x0 > l");
    if (!(t >= t0)) throw std::invalid_argument("ode_solve: need t >= t0");
    if (t == t0) return x0;
    if (p.b(x0) == 0.0) return x0;  // rest point; b is locally Lipschitz so the solution stays there
    const double target = integral_A(p.a, t0, t);
    const RealFunction inv = reciprocal(p.b);
    auto window = [&inv](double lo, double hi) { return integrate(inv, lo, hi, kQuad).value; };
    const auto y = walk_and_invert(window, x0, target, 200);
    if (!y) throw DomainError("ode_solve: t = " + num(t) + " is at or past the explosion time");
    return *y;
}

ExplosionTime ode_explosion_time(const OsgoodProblem& p, double t0, double x0) {
    if (!(ExtReal(x0) > p.l)) throw std::invalid_argument("ode_explosion_time: need x0 > l");
    ExplosionTime out;
    if (p.b(x0) == 0.0) {
        out.osgood_integral.kind = ImproperKind::Divergent;
        out.osgood_integral.rule = "rest point: b(x0) = 0";
        out.time = ExtReal::pos_inf();
        return out;
    }
    ImproperOptions bo;
    bo.tail_exponent_hint = p.tail_exponent_hint;
    out.osgood_integral = classify_improper(reciprocal(p.b), x0, bo);
    if (out.osgood_integral.unknown()) return out;
    if (out.osgood_integral.divergent()) {
        out.time = ExtReal::pos_inf();
        return out;
    }
    const double b_inf = out.osgood_integral.value;

    const FunctionExpr& a = p.a;
    if (auto c = a.constant_value()) {
        if (!(*c > 0.0)) throw DomainError("a must be positive");
        out.clock_integral.kind = ImproperKind::Divergent;
        out.clock_integral.rule = "constant";
        out.time = ExtReal(t0 + b_inf / *c);
        return out;
    }
    out.clock_integral = classify_improper([&a](double s) { return a(s); }, t0);
    if (out.clock_integral.unknown()) return out;
    if (out.clock_integral.convergent() && out.clock_integral.value <= b_inf) {
        out.time = ExtReal::pos_inf();
        return out;
    }
    auto window = [&a](double lo, double hi) { return integrate([&a](double s) { return a(s); }, lo, hi, kQuad).value; };
    const auto t = walk_and_invert(window, t0, b_inf, 200);
    if (!t) throw NumericalError("ode_explosion_time: A never reaches B(inf) = " + num(b_inf));
    out.time = ExtReal(*t);
    return out;
}

HypothesisCheck check_H1(const FunctionExpr& a, double eta) {
    if (!(eta > 0.0)) throw std::invalid_argument("check_H1: eta must be positive");
    HypothesisCheck c;
    c.name = "H1";
    std::vector<double> lt, lw;
    double lowest = HUGE_VAL;
    bool decreasing = true;
    double prev = HUGE_VAL;
    try {
        for (int k = 1; k <= 6; ++k) {
            const double t = std::pow(10.0, k);
            const double w = integral_A(a, t, t + eta);
            c.evidence.push_back("integral of a over [" + num(t) + ", " + num(t + eta) + "] = " + num(w));
            lowest = std::min(lowest, w);
            if (!(w < prev)) decreasing = false;
            prev = w;
            if (w > 0.0) {
                lt.push_back(std::log(t));
                lw.push_back(std::log(w));
            }
        }
    } catch (const Error& e) {
        c.evidence.push_back(std::string("evaluation failed: ") + e.what());
        return c;
    }
    if (!(lowest > 1e-6)) {
        c.evidence.push_back("infimum " + num(lowest) + " is not above 1e-6");
        return c;
    }
    if (decreasing && lt.size() == 6) {
        const double slope = (lw.back() - lw.front()) / (lt.back() - lt.front());
        if (slope < -0.1) {
            c.evidence.push_back("windowed integrals decay like t^" + num(slope) + "; limit is 0");
            return c;
        }
    }
    c.passed = true;
    return c;
}

HypothesisCheck check_H2(const FunctionExpr& b, const ExtReal& l, double r) {
    HypothesisCheck c;
    c.name = "H2";
    if (!(l < ExtReal(r)) && !(l == ExtReal(r)))
        c.evidence.push_back("note: l > r; positivity is checked on (l, inf)");

    std::vector<double> pos;
    if (l.is_finite()) {
        const double lv = l.value();
        for (int k = 0; k <= 80; ++k) pos.push_back(lv + 1e-9 * std::ldexp(1.0, k));
        const double top = std::max(lv, r) + 10.0;
        for (int i = 1; i <= 200; ++i) pos.push_back(lv + (top - lv) * i / 200.0);
    } else {
        for (int k = 0; k <= 40; ++k) {
            pos.push_back(r - std::ldexp(1.0, k));
            pos.push_back(r + std::ldexp(1.0, k));
        }
        for (int i = -200; i <= 200; ++i) pos.push_back(r + i / 20.0);
    }
    try {
        for (double x : pos) {
            const double v = b(x);
            if (!(v > 0.0)) {
                c.evidence.push_back("b(" + num(x) + ") = " + num(v) + " is not positive");
                return c;
            }
        }
        c.evidence.push_back("b > 0 at " + std::to_string(pos.size()) + " sampled points of (l, inf)");

        std::vector<double> mono;
        const double span = std::max(1.0, std::fabs(r));
        for (int i = 0; i <= 400; ++i) mono.push_back(r + 20.0 * i / 400.0);
        for (int k = 0; k <= 60; ++k) mono.push_back(r + span * (std::ldexp(1.0, k) - 1.0) / 1024.0);
        std::sort(mono.begin(), mono.end());
        mono.erase(std::unique(mono.begin(), mono.end()), mono.end());
        double last = b(mono.front());
        for (std::size_t i = 1; i < mono.size(); ++i) {
            const double v = b(mono[i]);
            if (v < last - 1e-12 * std::fabs(last)) {
                c.evidence.push_back("b decreases on [r, inf): b(" + num(mono[i - 1]) + ") = " + num(last) + " > b(" +
                                     num(mono[i]) + ") = " + num(v));
                return c;
            }
            last = v;
        }
        c.evidence.push_back("b non-decreasing at " + std::to_string(mono.size()) + " sampled points of [r, inf)");
    } catch (const Error& e) {
        c.evidence.push_back(std::string("evaluation failed: ") + e.what());
        return c;
    }
    c.passed = true;
    return c;
}

HypothesisCheck check_H3(const std::vector<double>& times, const std::vector<double>& values, double eta_tilde,
                         double threshold) {
    if (times.size() != values.size() || times.size() < 2)
        throw std::invalid_argument("check_H3: need at least two samples with matching times");
    if (!(eta_tilde > 0.0)) throw std::invalid_argument("check_H3: eta_tilde must be positive");
    HypothesisCheck c;
    c.name = "H3";
    const double t_obs = times.back();
    if (!(times.front() + eta_tilde < t_obs)) {
        c.evidence.push_back("record shorter than the window");
        return c;
    }

    // Sliding-window minimum over [t_i, t_i + eta_tilde].
    std::deque<std::size_t> window;
    std::size_t j = 0;
    const std::size_t n = times.size();
    std::vector<double> running_max_t;
    std::vector<double> running_max;
    double best = -HUGE_VAL;
    for (std::size_t i = 0; i < n && times[i] + eta_tilde <= t_obs; ++i) {
        while (j < n && times[j] <= times[i] + eta_tilde) {
            while (!window.empty() && values[window.back()] >= values[j]) window.pop_back();
            window.push_back(j++);
        }
        while (window.front() < i) window.pop_front();
        const double m = values[window.front()];
        if (m > best) {
            best = m;
            running_max_t.push_back(times[i]);
            running_max.push_back(best);
        }
    }
    const double cut = t_obs * 1e-3;
    double before = -HUGE_VAL;
    for (std::size_t k = 0; k < running_max_t.size() && running_max_t[k] <= cut; ++k) before = running_max[k];
    c.evidence.push_back("running max of windowed infima at t=" + num(t_obs) + ": " + num(best));
    c.evidence.push_back("running max at t=" + num(cut) + ": " + num(before));
    if (!(best > threshold)) {
        c.evidence.push_back("does not exceed threshold " + num(threshold));
        return c;
    }
    if (!(best > before)) {
        c.evidence.push_back("no growth over the last three decades");
        return c;
    }
    c.passed = true;
    return c;
}

HypothesisCheck check_H3(const FunctionExpr& g, double eta_tilde, double horizon, double threshold) {
    if (!(horizon > eta_tilde)) throw std::invalid_argument("check_H3: horizon must exceed eta_tilde");
    const double step = std::max(std::min(eta_tilde / 8.0, horizon / 1e5), horizon / 1e6);
    const std::size_t n = static_cast<std::size_t>(std::ceil(horizon / step));
    std::vector<double> ts(n + 1), vs(n + 1);
    try {
        for (std::size_t i = 0; i <= n; ++i) {
            ts[i] = std::min(horizon, static_cast<double>(i) * step);
            vs[i] = g(ts[i]);
        }
    } catch (const Error& e) {
        HypothesisCheck c;
        c.name = "H3";
        c.evidence.push_back(std::string("evaluation failed: ") + e.what());
        return c;
    }
    return check_H3(ts, vs, eta_tilde, threshold);
}

std::pair<double, double> bounded_noise_bracket(const OsgoodProblem& p) {
    const auto* bn = std::get_if<BoundedNoise>(&p.g);
    if (!bn) throw std::invalid_argument("bounded_noise_bracket: noise must be bounded");
    if (!(p.xi + bn->inf > p.r)) throw DomainError("bounded_noise_bracket: need xi + inf g > r");
    const ExplosionTime low = ode_explosion_time(p, 0.0, p.xi + bn->sup);
    const ExplosionTime high = ode_explosion_time(p, 0.0, p.xi + bn->inf);
    if (!low.time || !high.time) throw NumericalError("bounded_noise_bracket: an improper integral is undecided");
    if (!high.time->is_finite() || !low.time->is_finite())
        throw DomainError("bounded_noise_bracket: Osgood integral diverges; no finite explosion time");
    return {low.time->value(), high.time->value()};
}

namespace {

nlohmann::ordered_json improper_json(const ImproperVerdict& v) {
    nlohmann::ordered_json j;
    j["kind"] = std::string(to_string(v.kind));
    if (v.convergent()) j["value"] = v.value;
    j["rule"] = v.rule;
    if (!v.partials.empty()) j["last_partial"] = v.partials.back();
    if (std::isfinite(v.tail_slope)) j["tail_slope"] = v.tail_slope;
    return j;
}

bool gate(const HypothesisCheck& c, bool assume, std::vector<std::string>& evidence) {
    if (c.passed) return true;
    evidence.push_back(c.name + " failed" + (c.evidence.empty() ? "" : ": " + c.evidence.back()));
    if (assume) {
        evidence.push_back(c.name + " assumed by request");
        return true;
    }
    return false;
}

}  // namespace

std::string OsgoodReport::to_json() const {
    nlohmann::ordered_json j;
    j["verdict"] = std::string(to_string(verdict.kind));
    j["evidence"] = verdict.evidence;
    j["osgood_integral"] = improper_json(osgood_integral);
    auto& hyp = j["hypothesis_report"] = nlohmann::ordered_json::array();
    for (const auto& h : hypotheses) {
        hyp.push_back({{"name", h.name}, {"passed", h.passed}, {"heuristic", h.heuristic}, {"evidence", h.evidence}});
    }
    if (explosion_time) {
        if (explosion_time->is_finite()) j["explosion_time"] = explosion_time->value();
        else j["explosion_time"] = explosion_time->to_string();
    }
    if (bracket) j["bracket"] = {bracket->first, bracket->second};
    return j.dump(2);
}

OsgoodReport osgood_verdict(const OsgoodProblem& p, const VerdictOptions& opts) {
    const bool assume_hypotheses = opts.assume_hypotheses;
    p.validate();
    OsgoodReport rep;
    auto& ev = rep.verdict.evidence;

    const HypothesisCheck h1 = check_H1(p.a, p.eta);
    const HypothesisCheck h2 = check_H2(p.b, p.l, p.r);
    rep.hypotheses = {h1, h2};

    ImproperOptions bo;
    bo.tail_exponent_hint = p.tail_exponent_hint;
    const double from = std::max(p.r, p.xi);
    try {
        rep.osgood_integral = classify_improper(reciprocal(p.b), from, bo);
    } catch (const Error& e) {
        rep.osgood_integral.rule = std::string("evaluation failed: ") + e.what();
    }
    ev.push_back("integral of 1/b over [" + num(from) + ", inf): " + std::string(to_string(rep.osgood_integral.kind)) +
                 " (" + rep.osgood_integral.rule + ")");

    const bool h2_ok = gate(h2, assume_hypotheses, ev);

    // No noise: the Osgood integral decides the deterministic equation outright.
    if (std::holds_alternative<std::monostate>(p.g)) {
        if (!h2_ok) return rep;
        const ExplosionTime et = ode_explosion_time(p, 0.0, p.xi);
        if (!et.time) {
            ev.push_back("explosion time undecided");
            return rep;
        }
        rep.explosion_time = et.time;
        rep.verdict.kind = et.time->is_finite() ? VerdictKind::ExplodesFiniteTime : VerdictKind::NoExplosion;
        ev.push_back("deterministic equation: explosion time " + et.time->to_string());
        return rep;
    }

    const bool h1_ok = gate(h1, assume_hypotheses, ev);

    if (const auto* bn = std::get_if<BoundedNoise>(&p.g); bn && p.xi + bn->inf > p.r) {
        if (!h1_ok || !h2_ok) return rep;
        ev.push_back("bounded noise with xi + inf g > r");
        if (rep.osgood_integral.divergent()) {
            rep.verdict.kind = VerdictKind::NoExplosion;
        } else if (rep.osgood_integral.convergent()) {
            rep.verdict.kind = VerdictKind::ExplodesFiniteTime;
            try {
                rep.bracket = bounded_noise_bracket(p);
            } catch (const Error& e) {
                ev.push_back(std::string("bracket unavailable: ") + e.what());
            }
        }
        return rep;
    }

    HypothesisCheck h3;
    if (opts.h3_substitute) {
        h3 = *opts.h3_substitute;
    } else if (const auto* fn = std::get_if<FunctionNoise>(&p.g)) {
        h3 = check_H3(fn->g, p.eta_tilde, p.h3_horizon, p.h3_threshold);
    } else if (const auto* pn = std::get_if<PathNoise>(&p.g)) {
        h3 = check_H3(pn->times, pn->values, p.eta_tilde, p.h3_threshold);
    } else {
        h3.name = "H3";
        h3.heuristic = false;
        h3.evidence.push_back("bounded g cannot satisfy H3");
    }
    rep.hypotheses.push_back(h3);
    const bool h3_ok = gate(h3, assume_hypotheses, ev);
    if (!h1_ok || !h2_ok || !h3_ok) return rep;

    if (rep.osgood_integral.convergent()) rep.verdict.kind = VerdictKind::ExplodesFiniteTime;
    else if (rep.osgood_integral.divergent()) rep.verdict.kind = VerdictKind::NoExplosion;
    return rep;
}

}  // namespace blowup
