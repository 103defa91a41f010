#pragma once

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "blowup/expr.hpp"
#include "blowup/ext_real.hpp"
#include "blowup/improper.hpp"
#include "blowup/verdict.hpp"

namespace blowup {

/// g with known bounds inf g and sup g over [0, inf).
struct BoundedNoise {
    double inf = 0.0;
    double sup = 0.0;
};

/// g given as an expression in t.
struct FunctionNoise {
    FunctionExpr g;
};

/// g observed on an increasing time grid starting at 0.
struct PathNoise {
    std::vector<double> times;
    std::vector<double> values;
};

using NoiseDescriptor = std::variant<std::monostate, BoundedNoise, FunctionNoise, PathNoise>;

/// X_t = xi + integral_0^t a(s) b(X_s) ds + g(t).
struct OsgoodProblem {
    FunctionExpr a = FunctionExpr::constant(1.0, "t");
    FunctionExpr b = FunctionExpr::constant(0.0, "x");
    /// b is non-decreasing on [r, inf).
    double r = 0.0;
    /// b is positive on (l, inf).
    ExtReal l = ExtReal::neg_inf();
    double xi = 0.0;
    NoiseDescriptor g;
    /// Tail exponent p of 1/b ~ c x^-p, for when the classifier cannot decide.
    std::optional<double> tail_exponent_hint;
    double eta = 1.0;
    double eta_tilde = 1.0;
    /// Running-max level the H3 check must exceed.
    double h3_threshold = 10.0;
    /// Horizon used when g is an expression and has to be sampled for H3.
    double h3_horizon = 1e4;

    /// Throws std::invalid_argument unless xi > l and the bounded noise (if any) has inf <= sup.
    void validate() const;
};

/// Outcome of a heuristic hypothesis check.
struct HypothesisCheck {
    std::string name;
    bool passed = false;
    /// Sampled evidence, not a proof.
    bool heuristic = true;
    std::vector<std::string> evidence;
};

/// A_{t0}(x) = integral of a over [t0, x].
double integral_A(const FunctionExpr& a, double t0, double x);
/// B_xi(x) = integral of 1/b between xi and x (negative when x < xi). Throws DomainError if b
/// is not positive somewhere on the range.
double integral_B(const FunctionExpr& b, double xi, double x);

/// Solution of y' = a(t) b(y), y(t0) = x0, by inverting B at A(t).
/// Throws DomainError when t is at or past the explosion time.
double ode_solve(const OsgoodProblem& p, double t0, double x0, double t);

struct ExplosionTime {
    /// Empty when either improper integral is undecided.
    std::optional<ExtReal> time;
    /// B_{x0}(inf).
    ImproperVerdict osgood_integral;
    /// A_{t0}(inf).
    ImproperVerdict clock_integral;
};

/// Explosion time of y' = a(t) b(y), y(t0) = x0: A_{t0}^{-1}(B_{x0}(inf)) when that is
/// reachable, +inf otherwise.
ExplosionTime ode_explosion_time(const OsgoodProblem& p, double t0, double x0);

/// Windowed integrals of a over [t, t + eta] for t = 10, ..., 1e6. Fails when their
/// infimum is below 1e-6 or when they decay steadily toward zero.
HypothesisCheck check_H1(const FunctionExpr& a, double eta);
/// b > 0 on (l, inf) and non-decreasing on [r, inf), both sampled.
HypothesisCheck check_H2(const FunctionExpr& b, const ExtReal& l, double r);
/// Running max of the windowed infima of a sampled path. Passes when it exceeds
/// `threshold` at the end of the record and grew during the last three decades of time.
HypothesisCheck check_H3(const std::vector<double>& times, const std::vector<double>& values, double eta_tilde,
                         double threshold = 10.0);
/// Samples g on a uniform grid of [0, horizon] and runs the path check.
HypothesisCheck check_H3(const FunctionExpr& g, double eta_tilde, double horizon, double threshold = 10.0);

/// (A_0^{-1}(B_{xi + sup g}(inf)), A_0^{-1}(B_{xi + inf g}(inf))) for bounded g.
/// Throws DomainError unless xi + inf g > r and the Osgood integral converges.
std::pair<double, double> bounded_noise_bracket(const OsgoodProblem& p);

struct OsgoodReport {
    ExplosionVerdict verdict;
    /// Integral of 1/b over [max(r, xi), inf).
    ImproperVerdict osgood_integral;
    std::vector<HypothesisCheck> hypotheses;
    std::optional<ExtReal> explosion_time;
    std::optional<std::pair<double, double>> bracket;

    /// {verdict, evidence, osgood_integral, hypothesis_report, explosion_time?, bracket?}
    std::string to_json() const;
};

struct VerdictOptions {
    /// Keep going past failed hypothesis checks (they stay in the report).
    bool assume_hypotheses = false;
    /// Replaces the sampled H3 check, e.g. with an H4 result for Wiener-integral noise.
    std::optional<HypothesisCheck> h3_substitute;
};

/// Finite-time explosion iff the Osgood integral converges, provided H1-H3 hold.
///
/// Without noise the deterministic ODE is decided exactly. Bounded noise with
/// xi + inf g > r is decided without H3 and gets the explosion-time bracket.
/// A failed hypothesis makes the verdict Unknown unless `assume_hypotheses` is set.
OsgoodReport osgood_verdict(const OsgoodProblem& p, const VerdictOptions& opts = {});

}  // namespace blowup
