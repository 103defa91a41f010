// Desk-scale acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Reference values come from closed forms evaluated here or from the Boost oracles.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "blowup/analytic.hpp"
#include "blowup/improper.hpp"
#include "blowup/osgood.hpp"
#include "blowup/pde.hpp"
#include "blowup/stochastic.hpp"
#include "oracles.hpp"

using namespace blowup;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
};

std::string fmt(const char* f, double a) {
    char buf[96];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

// Phi(x) = P(|N| > x), straight from erfc.
double doubled_tail(double x) { return std::erfc(x / std::sqrt(2.0)); }

// Empirical CDF of a transformed-exit pool against a closed form, within 3 binomial SE.
Outcome compare_to_closed_form(const SamplePool& pool, const std::vector<double>& times,
                               const std::function<double(double)>& exact) {
    Outcome o;
    const auto ecdf = empirical_cdf(pool, times);
    const double n = static_cast<double>(pool.samples.size());
    double worst = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k) {
        const double ref = exact(times[k]);
        const double z = std::fabs(ecdf.cdf[k] - ref) / oracle::binomial_se(ref, n);
        worst = std::max(worst, z);
        if (z > 3.0) o.pass = false;
    }
    o.detail = "max |F_mc - F| / SE = " + fmt("%.3f", worst);
    return o;
}

Outcome power_sigma_mc() {
    const TransformProblem p(FunctionExpr::parse("abs(x)^2"), FunctionExpr::constant(1.0, "t"), 1.0, ExtReal(0.0),
                             ExtReal::pos_inf());
    const auto lim = psi_limits(p);
    if (!lim.barriers) return {false, "barriers undecided"};
    ExitOptions o;
    o.n_paths = 100000;
    o.seed = 20240101;
    o.clock_step = 1e-3;
    const auto pool = simulate_exit_transformed(p, *lim.barriers, 4.001, o);
    // |xi|^(1 - alpha) / (alpha - 1) = 1 at alpha = 2, xi = 1.
    return compare_to_closed_form(pool, {0.25, 0.5, 1.0, 2.0, 4.0},
                                  [](double t) { return doubled_tail(1.0 / std::sqrt(t)); });
}

Outcome exponential_sigma_mc() {
    const TransformProblem p(FunctionExpr::parse("exp(x)"), FunctionExpr::constant(1.0, "t"), 0.0, ExtReal::neg_inf(),
                             ExtReal::pos_inf());
    const auto lim = psi_limits(p);
    if (!lim.barriers) return {false, "barriers undecided"};
    ExitOptions o;
    o.n_paths = 100000;
    o.seed = 20240102;
    o.clock_step = 1e-3;
    const auto pool = simulate_exit_transformed(p, *lim.barriers, 4.001, o);
    // exp(-alpha xi) / |alpha| = 1 at alpha = 1, xi = 0.
    return compare_to_closed_form(pool, {0.25, 0.5, 1.0, 2.0, 4.0},
                                  [](double t) { return doubled_tail(1.0 / std::sqrt(t)); });
}

Outcome two_barrier_series() {
    const BarrierPair bp(ExtReal(-1.0), ExtReal(1.0));
    ExitOptions o;
    o.n_paths = 1000000;
    o.seed = 20240103;
    o.clock_step = 1e-3;
    const auto pool = simulate_brownian_exit(bp, 2.001, o);
    std::vector<double> times;
    for (int k = 1; k <= 10; ++k) times.push_back(0.2 * k);
    const auto ecdf = empirical_cdf(pool, times);
    Outcome out;
    double worst_z = 0.0, worst_trunc = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k) {
        const auto s = two_barrier_cdf(bp, times[k]);
        const auto tight = two_barrier_cdf(bp, times[k], 1e-15);
        worst_trunc = std::max(worst_trunc, std::fabs(s.value - tight.value));
        const double z = std::fabs(ecdf.cdf[k] - s.value) / oracle::binomial_se(s.value, 1e6);
        worst_z = std::max(worst_z, z);
    }
    out.pass = worst_z <= 3.0 && worst_trunc <= 1e-6;
    out.detail = "max z = " + fmt("%.3f", worst_z) + ", truncation drift = " + fmt("%.3g", worst_trunc);
    return out;
}

OsgoodProblem ode(const char* a, const char* b, double xi) {
    OsgoodProblem p;
    p.a = FunctionExpr::parse(a, "t");
    p.b = FunctionExpr::parse(b);
    p.xi = xi;
    p.l = ExtReal(0.0);
    return p;
}

Outcome osgood_exactness() {
    Outcome out;
    std::ostringstream d;
    d.precision(17);
    struct Case {
        const char* a;
        double exact;
        std::function<double(double, double)> rhs;
    };
    const Case cases[] = {
        {"1", 1.0, [](double, double y) { return y * y; }},
        {"t", std::sqrt(2.0), [](double t, double y) { return t * y * y; }},
    };
    for (const auto& c : cases) {
        const auto T = ode_explosion_time(ode(c.a, "x^2", 1.0), 0.0, 1.0);
        if (!T.time || !T.time->is_finite()) return {false, std::string("no finite time for a = ") + c.a};
        const double t = T.time->value();
        const auto cross = oracle::rk_crossing_time(c.rhs, 0.0, 1.0, 1e6, c.exact + 1.0);
        const bool ok = std::fabs(t - c.exact) <= 1e-8 && cross && *cross >= t - 1e-3 && *cross <= t + 1e-3;
        if (!ok) out.pass = false;
        d << "a=" << c.a << ": T=" << t << " rk(1e6)=" << (cross ? *cross : NAN) << "; ";
    }
    out.detail = d.str();
    return out;
}

Outcome verdict_suite() {
    Outcome out;
    std::string d;
    NoiseSpec n;
    n.f = FunctionExpr::constant(1.0, "t");
    for (const char* a : {"t^0", "t^1"}) {
        OsgoodProblem p;
        p.a = FunctionExpr::parse(a, "t");
        p.b = FunctionExpr::parse("8*x^2 - 36*x + 48");
        p.r = 2.25;
        p.xi = 1.0;
        const auto rep = sde_verdict(p, n);
        const bool ok = rep.osgood.verdict.kind == VerdictKind::ExplodesFiniteTime;
        if (!ok) out.pass = false;
        d += std::string("a=") + a + " " + std::string(to_string(rep.osgood.verdict.kind)) + "; ";
    }
    const auto h1 = check_H1(FunctionExpr::parse("t^-1", "t"), 1.0);
    if (h1.passed) out.pass = false;
    d += std::string("H1(t^-1) ") + (h1.passed ? "passed" : "failed") + "; ";
    const auto ee = scan_H4(FunctionExpr::parse("exp(exp(t))", "t"));
    if (ee.verdict != H4Status::Fails) out.pass = false;
    d += "H4(exp(exp t)) " + std::string(to_string(ee.verdict)) + "; ";
    for (const char* f : {"t^0", "t^1"}) {
        const auto r = scan_H4(FunctionExpr::parse(f, "t"));
        if (r.verdict != H4Status::Holds || r.route != "ratio") out.pass = false;
        d += std::string("H4(") + f + ") " + std::string(to_string(r.verdict)) + " via " + r.route + "; ";
    }
    out.detail = d;
    return out;
}

Outcome counterexample() {
    Outcome out;
    OsgoodProblem p;
    p.b = FunctionExpr::parse("x^2 - 1");
    p.xi = 1.0;
    EulerOptions o;
    o.t_max = 50.0;
    o.base_step = 1e-3;
    const auto path = euler_path(p, NoiseSpec{}, o, 0);
    double drift = 0.0;
    for (double v : path.values) drift = std::max(drift, std::fabs(v - 1.0));
    const bool reached = !path.times.empty() && path.times.back() >= 50.0 - 1e-9;
    const auto tail = classify_improper(FunctionExpr::parse("1/x^2"), 1.0);
    const auto h3 = check_H3(FunctionExpr::parse("-t", "t"), 1.0, 1e4);
    out.pass = reached && !path.explosion_time && drift <= 1e-6 && tail.convergent() && !h3.passed;
    out.detail = "max |X - 1| = " + fmt("%.3g", drift) + ", integral 1/s^2 " + std::string(to_string(tail.kind)) +
                 ", H3(-t) " + (h3.passed ? "passed" : "rejected");
    return out;
}

PdeProblem exp_sigma_problem(int n) {
    PdeProblem p;
    p.sigma = FunctionExpr::parse("exp(x)");
    p.b = FunctionExpr::parse("exp(2*x)");
    p.bc = BoundaryCase::RightOnly;
    p.x_lo = -2.0;
    p.x_hi = 10.0;
    p.t_final = 1.0;
    p.nx = n;
    p.nt = n;
    return p;
}

// Interior window: x in [-1, 3], t >= 0.05, away from the truncated boundaries and the initial layer.
double exp_sigma_error(const PdeSolution& s) {
    double e = 0.0;
    for (std::size_t k = 0; k < s.t.size(); ++k) {
        if (s.t[k] < 0.05 - 1e-12) continue;
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            const double x = s.x[i];
            if (x < -1.0 || x > 3.0) continue;
            e = std::max(e, std::fabs(s.u[k][i] - std::exp(-std::exp(-2.0 * x) / (2.0 * s.t[k]))));
        }
    }
    return e;
}

Outcome pde_closed_form() {
    const double e400 = exp_sigma_error(solve_forward(exp_sigma_problem(400)));
    const double e800 = exp_sigma_error(solve_forward(exp_sigma_problem(800)));
    return {e400 <= 5e-3 && e400 / e800 >= 3.0,
            "err(400) = " + fmt("%.3g", e400) + ", err(800) = " + fmt("%.3g", e800) + ", ratio " +
                fmt("%.2f", e400 / e800)};
}

Outcome pde_case_splitting() {
    PdeProblem p;
    p.b = FunctionExpr::constant(0.3);
    p.x_lo = -1.5;
    p.x_hi = 2.0;
    p.t_final = 2.0;
    p.bc = BoundaryCase::Both1;
    const auto both = solve_forward(p);
    p.bc = BoundaryCase::RightOnly;
    const auto right = solve_forward(p);
    p.bc = BoundaryCase::LeftOnly;
    const auto left = solve_forward(p);
    double e = 0.0;
    for (std::size_t k = 0; k < both.t.size(); ++k)
        for (std::size_t i = 0; i < both.x.size(); ++i)
            e = std::max(e, std::fabs(right.u[k][i] + left.u[k][i] - both.u[k][i]));
    return {e <= 5e-3, "sup |right + left - both| = " + fmt("%.3g", e)};
}

Outcome laplace_triangle() {
    DistCurve c;
    for (int k = 1; k <= 40000; ++k) {
        const double t = 2.5e-3 * k;
        c.times.push_back(t);
        c.cdf.push_back(one_barrier_cdf(1.0, t));
    }
    Outcome out;
    std::string d;
    for (double lambda : {0.5, 1.0, 2.0}) {
        const double from_cdf = laplace_from_cdf(c, lambda);
        ResolventProblem rp;
        rp.lambda = lambda;
        rp.x_lo = -12.0;
        rp.x_hi = 1.0;  // barrier at xi + m with xi = 0, m = 1
        const double from_ode = solve_resolvent_ode(rp).at(0.0);
        const double from_oracle = oracle::to_infinity(
            [lambda](double u) { return u > 0.0 ? lambda * std::erfc(1.0 / std::sqrt(2.0 * u)) * std::exp(-lambda * u) : 0.0; },
            0.0, 1e-12);
        const double gap = std::max({std::fabs(from_cdf - from_ode), std::fabs(from_cdf - from_oracle),
                                     std::fabs(from_ode - from_oracle)});
        if (gap > 1e-3) out.pass = false;
        d += "lambda " + fmt("%g", lambda) + ": gap " + fmt("%.2g", gap) + "; ";
    }
    out.detail = d;
    return out;
}

Outcome property_suites() {
    Outcome out;
    std::string d;
    std::mt19937_64 rng(2718);
    std::uniform_real_distribution<double> u(0.0, 1.0);

    // Comparison lemma: a supersolution of the integral inequality stays above the solution.
    int order_violations = 0;
    for (int c = 0; c < 50; ++c) {
        const double k = 0.5 + 2.0 * u(rng), pw = 1.1 + 1.9 * u(rng), dd = 0.2 * u(rng);
        char buf[96];
        std::snprintf(buf, sizeof buf, "%.17g*x^%.17g + %.17g", k, pw, dd);
        auto p = ode("1 + t/2", buf, 0.0);
        const double u0 = 0.5 + u(rng);
        const double v0 = u0 + 0.3 * u(rng);
        const double q1 = u(rng), q2 = u(rng), tq = u(rng);
        auto rhs = [=](double t, double v) { return (1 + t / 2) * (k * std::pow(v, pw) + dd) + (t < tq ? q1 : q2); };
        const auto T = ode_explosion_time(p, 0.0, u0);
        if (!T.time) {
            ++order_violations;
            continue;
        }
        const double horizon = T.time->is_finite() ? 0.95 * T.time->value() : 2.0;
        for (int i = 1; i <= 20; ++i) {
            const double t = horizon * i / 20.0;
            if (oracle::rk_crossing_time(rhs, 0.0, v0, 1e12, t)) break;
            if (oracle::rk_solve(rhs, 0.0, v0, t) < ode_solve(p, 0.0, u0, t) * (1.0 - 1e-9)) {
                ++order_violations;
                break;
            }
        }
    }
    if (order_violations) out.pass = false;
    d += "ordering violations " + std::to_string(order_violations) + "/50; ";

    // Psi round trips.
    double worst_psi = 0.0;
    for (int c = 0; c < 100; ++c) {
        const double alpha = 1.2 + 1.8 * u(rng), xi = 0.3 + 2.0 * u(rng);
        char buf[64];
        std::snprintf(buf, sizeof buf, "abs(x)^%.17g", alpha);
        const TransformProblem p(FunctionExpr::parse(buf), FunctionExpr::constant(1.0, "t"), xi, ExtReal(0.0),
                                 ExtReal::pos_inf());
        const auto lim = psi_limits(p);
        if (!lim.barriers) {
            worst_psi = HUGE_VAL;
            break;
        }
        const double hi = lim.barriers->r.value();
        const double y = -5.0 + (hi + 5.0) * (1e-3 + (1.0 - 2e-3) * u(rng));
        worst_psi = std::max(worst_psi, std::fabs(psi(p, psi_inverse(p, *lim.barriers, y)) - y));
    }
    if (!(worst_psi <= 1e-8)) out.pass = false;
    d += "psi round trip " + fmt("%.2g", worst_psi) + "; ";

    // s^-p family against the p-test.
    int wrong = 0;
    for (double p : {0.5, 0.8, 0.9, 1.0, 1.1, 1.25, 1.5, 2.0, 3.0, 5.0}) {
        const auto v = classify_improper([p](double s) { return std::pow(s, -p); }, 1.0);
        const bool ok = p > 1.0 ? v.convergent() && std::fabs(v.value - 1.0 / (p - 1.0)) <= 1e-5 / (p - 1.0)
                        : p < 1.0 ? v.divergent()
                                  : !v.convergent();
        if (!ok) ++wrong;
    }
    if (wrong) out.pass = false;
    d += "classifier misses " + std::to_string(wrong) + "/10; ";

    // Determinism across worker counts.
    const TransformProblem tp(FunctionExpr::parse("abs(x)^2"), FunctionExpr::constant(1.0, "t"), 1.0, ExtReal(0.0),
                              ExtReal::pos_inf());
    const auto bp = *psi_limits(tp).barriers;
    ExitOptions eo;
    eo.n_paths = 5000;
    eo.seed = 99;
    eo.clock_step = 1e-3;
    eo.workers = 1;
    const auto exit1 = simulate_exit_transformed(tp, bp, 4.0, eo).to_csv();
    eo.workers = 8;
    const auto exit8 = simulate_exit_transformed(tp, bp, 4.0, eo).to_csv();
    OsgoodProblem q;
    q.b = FunctionExpr::parse("8*x^2 - 36*x + 48");
    q.r = 2.25;
    q.xi = 1.0;
    NoiseSpec n;
    n.f = FunctionExpr::constant(1.0, "t");
    EulerOptions uo;
    uo.n_paths = 200;
    uo.seed = 5;
    uo.t_max = 5.0;
    uo.base_step = 1e-3;
    uo.workers = 1;
    const auto euler1 = simulate_sde_euler(q, n, uo).to_csv();
    uo.workers = 8;
    const auto euler8 = simulate_sde_euler(q, n, uo).to_csv();
    const bool same = exit1 == exit8 && euler1 == euler8;
    if (!same) out.pass = false;
    d += std::string("1 vs 8 workers ") + (same ? "byte-identical" : "DIFFER");
    out.detail = d;
    return out;
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "closed form vs Monte Carlo, sigma = |x|^2", 30, power_sigma_mc},
        {2, "closed form vs Monte Carlo, sigma = exp(x)", 30, exponential_sigma_mc},
        {3, "two-barrier series vs brute force", 120, two_barrier_series},
        {4, "Osgood exactness", 5, osgood_exactness},
        {5, "verdict suite", 30, verdict_suite},
        {6, "counterexample fidelity", 5, counterexample},
        {7, "PDE vs closed form", 60, pde_closed_form},
        {8, "PDE case splitting", 60, pde_case_splitting},
        {9, "Laplace triangle", 30, laplace_triangle},
        {10, "property suites", 120, property_suites},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_budget = secs <= c.budget_s;
        const bool pass = o.pass && in_budget;
        if (!pass) ++failures;
        std::printf("[%s] %2d %s: %s (%.1f s, budget %.0f s%s)\n", pass ? "PASS" : "FAIL", c.id, c.name,
                    o.detail.c_str(), secs, c.budget_s, in_budget ? "" : ", over budget");
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
