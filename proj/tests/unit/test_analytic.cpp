#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "blowup/analytic.hpp"
#include "blowup/errors.hpp"
#include "blowup/stochastic.hpp"
#include "oracles.hpp"

using namespace blowup;

namespace {

TransformProblem power_sigma(double alpha = 2.0, double xi = 1.0) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "abs(x)^%.17g", alpha);
    return TransformProblem(FunctionExpr::parse(buf), FunctionExpr::constant(1.0, "t"), xi, ExtReal(0.0),
                            ExtReal::pos_inf());
}

TransformProblem exponential_sigma(double alpha, double xi = 0.0) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "exp(%.17g*x)", alpha);
    return TransformProblem(FunctionExpr::parse(buf), FunctionExpr::constant(1.0, "t"), xi, ExtReal::neg_inf(),
                            ExtReal::pos_inf());
}

}  // namespace

TEST(TimeChangeTest, AccumulateH) {
    EXPECT_NEAR(accumulate_H(FunctionExpr::constant(1.0, "t"), 4.0), 4.0, 1e-12);
    EXPECT_NEAR(accumulate_H(FunctionExpr::parse("t", "t"), 1.0), 1.0 / 3.0, 1e-12);
    const double ref = oracle::tanh_sinh([](double s) { return 1.0 / std::sqrt(s); }, 0.0, 1.0, 1e-14);
    EXPECT_NEAR(accumulate_H(FunctionExpr::parse("t^-0.25", "t"), 1.0), ref, 1e-9);
    EXPECT_NEAR(ref, 2.0, 1e-12);
}

TEST(TimeChangeTest, InvertH) {
    EXPECT_NEAR(invert_H(FunctionExpr::constant(1.0, "t"), 2.5), 2.5, 1e-9 * 3.5);
    EXPECT_NEAR(invert_H(FunctionExpr::parse("t", "t"), 9.0), 3.0, 1e-8);
    EXPECT_THROW(invert_H(FunctionExpr::parse("exp(-t)", "t"), 1.0), DomainError);
}

TEST(TimeChangeTest, TableRoundTrip) {
    const TimeChange clock(FunctionExpr::parse("1 + sin(t)^2", "t"), 20.0, 256);
    for (double t : {0.0, 0.37, 1.0, 5.5, 19.99}) {
        const double v = clock(t);
        const double ref = oracle::gk([](double s) { return std::pow(1 + std::sin(s) * std::sin(s), 2); }, 0.0, t);
        EXPECT_NEAR(v, ref, 1e-10 * (1 + ref));
        EXPECT_NEAR(clock.inverse(v), t, 1e-9 * (1 + t));
    }
}

TEST(Psi, ClosedForms) {
    const auto p21 = power_sigma();
    EXPECT_NEAR(psi(p21, 2.0), 0.5, 1e-12);
    EXPECT_EQ(psi(p21, 1.0), 0.0);
    const auto p22 = exponential_sigma(1.0);
    EXPECT_NEAR(psi(p22, 1.0), 1.0 - std::exp(-1.0), 1e-12);
}

TEST(Psi, RejectsSignChange) {
    EXPECT_THROW(TransformProblem(FunctionExpr::parse("x"), FunctionExpr::constant(1.0, "t"), 1.0, ExtReal(-1.0),
                                  ExtReal(2.0)),
                 std::invalid_argument);
    EXPECT_THROW(power_sigma(2.0, -1.0), std::invalid_argument);
}

TEST(Psi, Limits) {
    const auto l21 = psi_limits(power_sigma());
    ASSERT_TRUE(l21.barriers);
    EXPECT_TRUE(l21.barriers->l.is_neg_inf());
    EXPECT_NEAR(l21.barriers->r.value(), 1.0, 1e-8);

    const auto l22 = psi_limits(exponential_sigma(1.0));
    ASSERT_TRUE(l22.barriers);
    EXPECT_TRUE(l22.barriers->l.is_neg_inf());
    EXPECT_NEAR(l22.barriers->r.value(), 1.0, 1e-8);

    const TransformProblem bm(FunctionExpr::constant(1.0), FunctionExpr::constant(1.0, "t"), 0.0, ExtReal::neg_inf(),
                              ExtReal::pos_inf());
    const auto lb = psi_limits(bm);
    ASSERT_TRUE(lb.barriers);
    EXPECT_TRUE(lb.barriers->both_infinite());

    // Negative sigma: Psi decreases, barriers stay ordered.
    const TransformProblem neg(FunctionExpr::parse("-(x^2)"), FunctionExpr::constant(1.0, "t"), 1.0, ExtReal(0.0),
                               ExtReal::pos_inf());
    const auto ln = psi_limits(neg);
    ASSERT_TRUE(ln.barriers);
    EXPECT_NEAR(ln.barriers->l.value(), -1.0, 1e-8);
    EXPECT_TRUE(ln.barriers->r.is_pos_inf());
}

TEST(Psi, Inverse) {
    const auto p = power_sigma();
    const BarrierPair bp(ExtReal::neg_inf(), ExtReal(1.0));
    EXPECT_NEAR(psi_inverse(p, bp, 0.0), 1.0, 1e-12);
    EXPECT_NEAR(psi_inverse(p, bp, 0.5), 2.0, 1e-8);
    EXPECT_NEAR(psi_inverse(p, bp, 0.999), 1.0 / (1.0 - 0.999), 1e-3);
    EXPECT_THROW(psi_inverse(p, bp, 1.5), std::invalid_argument);
}

TEST(PhiTail, Values) {
    EXPECT_DOUBLE_EQ(phi_tail(0.0), 1.0);
    EXPECT_EQ(phi_tail(std::numeric_limits<double>::infinity()), 0.0);
    EXPECT_NEAR(phi_tail(1.0), oracle::gaussian_tail2(1.0), 1e-14);
    EXPECT_NEAR(phi_tail(3.7), oracle::gaussian_tail2(3.7), 1e-15);
    EXPECT_NEAR(phi_tail(-1.0), 2.0 - phi_tail(1.0), 1e-15);
}

TEST(OneBarrier, Values) {
    EXPECT_DOUBLE_EQ(one_barrier_cdf(1.0, 1.0), phi_tail(1.0));
    EXPECT_NEAR(one_barrier_cdf(1.0, 1e30), 1.0, 1e-12);
    EXPECT_EQ(one_barrier_cdf(1.0, 0.0), 0.0);
    EXPECT_THROW(one_barrier_cdf(0.0, 1.0), std::invalid_argument);
}

TEST(OneBarrier, MatchesBridgeCorrectedSimulation) {
    // Level 2 by time 1; the bridge correction makes grid-multiple times unbiased.
    ExitOptions o;
    o.n_paths = 100000;
    o.seed = 11;
    o.clock_step = 1e-3;
    const auto pool = simulate_brownian_exit(BarrierPair(ExtReal::neg_inf(), ExtReal(2.0)), 1.0 + 1e-3, o);
    const auto c = empirical_cdf(pool, {1.0});
    const double exact = one_barrier_cdf(2.0, 1.0);
    EXPECT_LE(std::fabs(c.cdf[0] - exact), 3.0 * oracle::binomial_se(exact, 1e5)) << c.cdf[0] << " vs " << exact;
}

TEST(TwoBarrier, Limits) {
    const BarrierPair sym(ExtReal(-1.0), ExtReal(1.0));
    EXPECT_NEAR(two_barrier_cdf(sym, 1e4).value, 1.0, 1e-12);
    EXPECT_THROW(two_barrier_cdf(sym, 0.0), std::invalid_argument);
    EXPECT_THROW(two_barrier_cdf(BarrierPair(ExtReal::neg_inf(), ExtReal(1.0)), 1.0), std::invalid_argument);
    for (double h : {0.1, 1.0, 4.0}) {
        const BarrierPair far(ExtReal(-51.0 * std::sqrt(h)), ExtReal(1.0));
        EXPECT_NEAR(two_barrier_cdf(far, h).value, one_barrier_cdf(1.0, h), 1e-10);
    }
}

TEST(TwoBarrier, MatchesIndependentSeries) {
    // First-exit density through either barrier as a signed image sum, integrated by
    // quadrature; an independent route to the same law.
    const double l = -0.7, r = 1.3, w = r - l;
    auto exit_density = [&](double s) {
        auto g = [s](double a) { return a * std::exp(-a * a / (2 * s)) / std::sqrt(2 * std::numbers::pi * s * s * s); };
        double acc = 0.0;
        for (int k = -40; k <= 40; ++k) acc += g(r + 2.0 * k * w) + g(-l + 2.0 * k * w);
        return acc;
    };
    for (double h : {0.05, 0.5, 2.0}) {
        const double ref = oracle::gk(exit_density, 0.0, h, 1e-13);
        EXPECT_NEAR(two_barrier_cdf(BarrierPair(ExtReal(l), ExtReal(r)), h).value, ref, 1e-9) << "H = " << h;
    }
}

TEST(AnalyticProperty, MonotoneInClock) {
    const BarrierPair bp(ExtReal(-0.5), ExtReal(2.0));
    double prev1 = 0.0, prev2 = 0.0;
    for (int k = 1; k <= 400; ++k) {
        const double h = 0.01 * k * k / 40.0;
        const double v1 = one_barrier_cdf(2.0, h);
        const double v2 = two_barrier_cdf(bp, h).value;
        EXPECT_GE(v1, prev1);
        EXPECT_GE(v2, prev2 - 1e-15);
        prev1 = v1;
        prev2 = v2;
    }
}

TEST(AnalyticProperty, FarLeftBarrierConvergesToOneBarrier) {
    for (double h : {0.5, 1.0, 3.0}) {
        double prev_gap = std::numeric_limits<double>::infinity();
        for (double k : {10.0, 20.0, 50.0}) {
            const BarrierPair bp(ExtReal(-k * std::sqrt(h)), ExtReal(1.0));
            const double gap = std::fabs(two_barrier_cdf(bp, h).value - one_barrier_cdf(1.0, h));
            EXPECT_LE(gap, prev_gap);
            prev_gap = gap;
        }
        EXPECT_LT(prev_gap, 1e-8);
    }
}

TEST(AnalyticProperty, TruncationSelfConsistency) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.1, 3.0);
    for (int i = 0; i < 200; ++i) {
        const BarrierPair bp(ExtReal(-u(rng)), ExtReal(u(rng)));
        const double h = u(rng) * u(rng);
        const auto fine = two_barrier_cdf(bp, h, 1e-12);
        const auto coarse = two_barrier_cdf(bp, h, 1e-6);
        EXPECT_LE(std::fabs(fine.value - coarse.value), 1e-6);
        EXPECT_LE(std::fabs(fine.value - coarse.value), coarse.error_bound + 1e-15);
    }
}

TEST(AnalyticProperty, PsiRoundTrip) {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int cases = 0;
    while (cases < 100) {
        const int family = cases % 4;
        std::optional<TransformProblem> p;
        if (family == 0) {
            p = power_sigma(1.2 + 1.8 * u(rng), 0.3 + 2.0 * u(rng));
        } else if (family == 1) {
            const double a = (u(rng) < 0.5 ? -1.0 : 1.0) * (0.5 + 1.5 * u(rng));
            p = exponential_sigma(a, -1.0 + 2.0 * u(rng));
        } else if (family == 2) {
            p.emplace(FunctionExpr::parse("1 + x^2"), FunctionExpr::constant(1.0, "t"), -2.0 + 4.0 * u(rng),
                      ExtReal::neg_inf(), ExtReal::pos_inf());
        } else {
            p.emplace(FunctionExpr::parse("-(2 + sin(x))"), FunctionExpr::constant(1.0, "t"), -2.0 + 4.0 * u(rng),
                      ExtReal::neg_inf(), ExtReal::pos_inf());
        }
        const auto lim = psi_limits(*p);
        ASSERT_TRUE(lim.barriers);
        const auto& bp = *lim.barriers;
        const double lo = bp.l.is_finite() ? bp.l.value() : -5.0;
        const double hi = bp.r.is_finite() ? bp.r.value() : 5.0;
        const double eps = 1e-3 * (hi - lo);
        const double y = lo + eps + (hi - lo - 2.0 * eps) * u(rng);
        const double x = psi_inverse(*p, bp, y);
        EXPECT_LE(std::fabs(psi(*p, x) - y), 1e-8) << "family " << family << " y " << y;
        ++cases;
    }
}

TEST(TransformVerdict, PowerAndExponentialSigma) {
    const auto r21 = transform_explosion_verdict(power_sigma());
    EXPECT_EQ(r21.verdict.kind, VerdictKind::ExplodesFiniteTime);
    const TransformProblem bm(FunctionExpr::constant(1.0), FunctionExpr::constant(1.0, "t"), 0.0, ExtReal::neg_inf(),
                              ExtReal::pos_inf());
    EXPECT_EQ(transform_explosion_verdict(bm).verdict.kind, VerdictKind::NoExplosion);
    const auto r22 = transform_explosion_verdict(exponential_sigma(-1.0));
    EXPECT_EQ(r22.verdict.kind, VerdictKind::ExplodesFiniteTime);
    ASSERT_TRUE(r22.limits.barriers);
    EXPECT_NEAR(r22.limits.barriers->l.value(), -1.0, 1e-8);
    EXPECT_TRUE(r22.limits.barriers->r.is_pos_inf());
}

TEST(TransformVerdict, SaturatingClockIsUnknownWithProbability) {
    const TransformProblem p(FunctionExpr::parse("x^2"), FunctionExpr::parse("exp(-t)", "t"), 1.0, ExtReal(0.0),
                             ExtReal::pos_inf());
    const auto rep = transform_explosion_verdict(p);
    EXPECT_EQ(rep.verdict.kind, VerdictKind::Unknown);
    ASSERT_TRUE(rep.verdict.explosion_probability);
    EXPECT_NEAR(*rep.verdict.explosion_probability, phi_tail(1.0 / std::sqrt(0.5)), 1e-8);
}

TEST(AnalyticDistribution, TagsAndMass) {
    const auto p = power_sigma();
    const BarrierPair bp(ExtReal::neg_inf(), ExtReal(1.0));
    const auto c = analytic_distribution(p, bp, {0.0, 0.5, 1.0, 1e12});
    EXPECT_EQ(c.closed_form.value_or(""), "one_barrier_phi");
    EXPECT_EQ(c.cdf[0], 0.0);
    EXPECT_DOUBLE_EQ(c.cdf[2], phi_tail(1.0));
    EXPECT_NEAR(c.total_mass, 1.0, 1e-5);
    c.validate();

    const TransformProblem q(FunctionExpr::parse("1 + x^2"), FunctionExpr::constant(1.0, "t"), 0.0,
                             ExtReal::neg_inf(), ExtReal::pos_inf());
    const auto bq = psi_limits(q).barriers.value();
    const auto cq = analytic_distribution(q, bq, {1.0, 100.0});
    EXPECT_EQ(cq.closed_form.value_or(""), "two_barrier_image_series");
    EXPECT_NEAR(cq.total_mass, 1.0, 1e-12);
    EXPECT_THROW(analytic_distribution(q, BarrierPair(ExtReal::neg_inf(), ExtReal::pos_inf()), {1.0}), DomainError);
}
