#pragma once

#include <optional>
#include <vector>

#include "blowup/dist_curve.hpp"
#include "blowup/expr.hpp"
#include "blowup/ext_real.hpp"
#include "blowup/improper.hpp"
#include "blowup/verdict.hpp"

namespace blowup {

/// dX = (1/2) sigma(X) sigma'(X) h(t)^2 dt + sigma(X) h(t) dW,  X_0 = xi,
/// on an interval (x1, x2) where sigma does not vanish.
class TransformProblem {
public:
    /// Throws std::invalid_argument unless x1 < xi < x2 and sigma keeps one strict
    /// sign on (x1, x2) (checked by dense sampling).
    TransformProblem(FunctionExpr sigma, FunctionExpr h, double xi, ExtReal x1, ExtReal x2);

    const FunctionExpr& sigma() const noexcept { return sigma_; }
    const FunctionExpr& h() const noexcept { return h_; }
    double xi() const noexcept { return xi_; }
    const ExtReal& x1() const noexcept { return x1_; }
    const ExtReal& x2() const noexcept { return x2_; }
    /// +1 if sigma > 0 on the interval, -1 if sigma < 0.
    int sigma_sign() const noexcept { return sign_; }

private:
    FunctionExpr sigma_;
    FunctionExpr h_;
    double xi_;
    ExtReal x1_;
    ExtReal x2_;
    int sign_ = 1;
};

/// Images (l, r) of the state-space endpoints under the transform, ordered so l < 0 < r.
struct BarrierPair {
    ExtReal l;
    ExtReal r;

    BarrierPair(ExtReal left, ExtReal right);
    bool both_finite() const noexcept { return l.is_finite() && r.is_finite(); }
    bool both_infinite() const noexcept { return !l.is_finite() && !r.is_finite(); }
};

/// Tail exponents for the improper integrals toward x1 and x2, used when the
/// numerical classifier cannot decide.
struct PsiHints {
    std::optional<double> toward_x1;
    std::optional<double> toward_x2;
};

struct PsiLimits {
    ImproperVerdict toward_x1;
    ImproperVerdict toward_x2;
    /// Empty when either side is Unknown.
    std::optional<BarrierPair> barriers;
};

/// H(t) = integral of h^2 over [0, t]. Throws NumericalError when h^2 is not
/// integrable on [0, t].
double accumulate_H(const FunctionExpr& h, double t);

/// Smallest t with H(t) = v, within 1e-9 (1 + v). Throws DomainError when H
/// saturates below v.
double invert_H(const FunctionExpr& h, double v);

/// Tabulated time change for repeated evaluation and inversion.
class TimeChange {
public:
    TimeChange(FunctionExpr h, double horizon, int cells = 1024);

    double operator()(double t) const;
    double inverse(double v) const;
    double horizon() const noexcept { return horizon_; }
    double horizon_value() const noexcept { return cumulative_.back(); }

private:
    double cell_integral(double a, double b) const;
    double inverse_in_cell(std::size_t cell, double v) const;

    FunctionExpr h_;
    double horizon_;
    std::optional<double> const_rate_;
    std::vector<double> nodes_;
    std::vector<double> cumulative_;
};

/// Psi_xi(x) = integral from xi to x of dz / sigma(z).
double psi(const TransformProblem& p, double x);

/// Improper limits of Psi at x1+ and x2-.
PsiLimits psi_limits(const TransformProblem& p, const PsiHints& hints = {});

/// x with Psi(x) = y, |Psi(x) - y| <= 1e-9. Throws std::invalid_argument unless l < y < r.
double psi_inverse(const TransformProblem& p, const BarrierPair& barriers, double y);

/// Doubled Gaussian tail: (2/sqrt(2 pi)) * integral_x^inf exp(-z^2/2) dz.
double phi_tail(double x);

/// P(first hitting time of level m by a standard Brownian motion <= h_val).
double one_barrier_cdf(double m, double h_val);

struct SeriesValue {
    double value = 0.0;
    /// Alternating-series bound: magnitude of the first omitted group.
    double error_bound = 0.0;
    int groups = 0;
};

/// P(a standard Brownian motion leaves (l, r) before clock h_val), from the
/// image series integrated term by term into doubled Gaussian tails.
SeriesValue two_barrier_cdf(const BarrierPair& barriers, double h_val, double tol = 1e-12);

struct TransformReport {
    ExplosionVerdict verdict;
    PsiLimits limits;
    /// Classification of H(inf).
    ImproperVerdict clock;
};

/// Explosion in finite time iff a barrier is finite, provided H(inf) = inf.
/// With H(inf) finite the verdict stays Unknown and the explosion probability
/// P(exit before H(inf)) is attached.
TransformReport transform_explosion_verdict(const TransformProblem& p, const PsiHints& hints = {},
                                            std::optional<double> clock_tail_hint = std::nullopt);

/// P(explosion time <= t) on the given grid. Throws DomainError if both barriers are infinite.
DistCurve analytic_distribution(const TransformProblem& p, const BarrierPair& barriers,
                                const std::vector<double>& times);

}  // namespace blowup
