#include "blowup/pde.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "blowup/errors.hpp"
#include "json.hpp"

namespace blowup {

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Solves a_i x_{i-1} + d_i x_i + c_i x_{i+1} = r_i in place (r becomes x).
void thomas(const std::vector<double>& a, std::vector<double> d, const std::vector<double>& c, std::vector<double>& r) {
    const std::size_t n = d.size();
    for (std::size_t i = 1; i < n; ++i) {
        if (d[i - 1] == 0.0) throw NumericalError("tridiagonal system is singular at row " + std::to_string(i - 1));
        const double m = a[i] / d[i - 1];
        d[i] -= m * c[i - 1];
        r[i] -= m * r[i - 1];
    }
    if (d[n - 1] == 0.0) throw NumericalError("tridiagonal system is singular at row " + std::to_string(n - 1));
    r[n - 1] /= d[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) r[i] = (r[i] - c[i] * r[i + 1]) / d[i];
}

double interpolate(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
    if (x <= xs.front()) return ys.front();
    if (x >= xs.back()) return ys.back();
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - xs.begin());
    const double w = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
    return (1.0 - w) * ys[i - 1] + w * ys[i];
}

}  // namespace

std::string_view to_string(BoundaryCase c) {
    switch (c) {
        case BoundaryCase::Both1: return "both1";
        case BoundaryCase::RightOnly: return "right";
        case BoundaryCase::LeftOnly: return "left";
    }
    return "both1";
}

BoundaryCase parse_boundary_case(std::string_view text) {
    if (text == "both1" || text == "both") return BoundaryCase::Both1;
    if (text == "right" || text == "right_only") return BoundaryCase::RightOnly;
    if (text == "left" || text == "left_only") return BoundaryCase::LeftOnly;
    throw std::invalid_argument("unknown boundary case '" + std::string(text) + "' (expected both1, right or left)");
}

void PdeProblem::validate() const {
    if (!(x_lo < x_hi)) throw std::invalid_argument("PdeProblem: need x_lo < x_hi");
    if (nx < 16 || nt < 16) throw std::invalid_argument("PdeProblem: nx and nt must be at least 16");
    if (!(t_final > 0.0)) throw std::invalid_argument("PdeProblem: t_final must be positive");
    if (!(theta >= 0.5 && theta <= 1.0)) throw std::invalid_argument("PdeProblem: theta must lie in [1/2, 1]");
    if (startup_steps < 0 || startup_steps > nt) throw std::invalid_argument("PdeProblem: bad startup step count");
    if (spacing == Spacing::Geometric && !(x_lo > 0.0))
        throw std::invalid_argument("PdeProblem: geometric spacing needs x_lo > 0");
}

std::vector<double> make_space_grid(double lo, double hi, int n, Spacing spacing) {
    if (n < 1 || !(lo < hi)) throw std::invalid_argument("make_space_grid: bad extents");
    std::vector<double> x(static_cast<std::size_t>(n) + 1);
    const double ratio = spacing == Spacing::Geometric ? std::log(hi / lo) : 0.0;
    for (int i = 0; i <= n; ++i) {
        const double s = static_cast<double>(i) / n;
        x[static_cast<std::size_t>(i)] = spacing == Spacing::Geometric ? lo * std::exp(ratio * s) : lo + (hi - lo) * s;
    }
    x.front() = lo;
    x.back() = hi;
    return x;
}

double PdeSolution::at(std::size_t k, double xv) const {
    if (k >= u.size()) throw std::out_of_range("PdeSolution::at: time index out of range");
    return interpolate(x, u[k], xv);
}

std::string PdeSolution::to_csv() const {
    std::string out = "t,x,u\n";
    for (std::size_t k = 0; k < t.size(); ++k)
        for (std::size_t i = 0; i < x.size(); ++i) out += num(t[k]) + "," + num(x[i]) + "," + num(u[k][i]) + "\n";
    return out;
}

std::string PdeSolution::metadata_json() const {
    nlohmann::ordered_json j;
    j["scheme"] = theta == 0.5 ? "crank-nicolson" : "theta";
    j["theta"] = theta;
    j["startup_half_steps"] = 2 * startup_steps;
    j["boundary_case"] = std::string(to_string(bc));
    j["nx"] = x.size() - 1;
    j["nt"] = t.size() - 1;
    j["x_lo"] = x.front();
    j["x_hi"] = x.back();
    j["t_final"] = t.back();
    j["peclet_threshold"] = 2.0;
    j["max_peclet"] = max_peclet;
    j["upwinded_cells"] = upwinded_cells;
    j["u_min"] = u_min;
    j["u_max"] = u_max;
    return j.dump(2);
}

PdeSolution solve_forward(const PdeProblem& p) {
    p.validate();
    PdeSolution s;
    s.bc = p.bc;
    s.theta = p.theta;
    s.startup_steps = p.startup_steps;
    s.x = make_space_grid(p.x_lo, p.x_hi, p.nx, p.spacing);
    const std::size_t n = s.x.size();
    const std::size_t m = n - 2;  // interior unknowns

    // Spatial operator (L u)_i = lo_i u_{i-1} + di_i u_i + up_i u_{i+1} at interior nodes.
    std::vector<double> lo(m), di(m), up(m);
    for (std::size_t j = 0; j < m; ++j) {
        const std::size_t i = j + 1;
        const double hm = s.x[i] - s.x[i - 1];
        const double hp = s.x[i + 1] - s.x[i];
        double sig, drift;
        try {
            sig = p.sigma(s.x[i]);
            drift = p.b(s.x[i]);
        } catch (const DomainError& e) {
            throw NumericalError("solve_forward: coefficient undefined at x = " + num(s.x[i]) + ": " + e.what());
        }
        if (!std::isfinite(sig) || !std::isfinite(drift))
            throw NumericalError("solve_forward: coefficient overflows at x = " + num(s.x[i]));
        const double diff = 0.5 * sig * sig;
        const double peclet = diff > 0.0 ? std::fabs(drift) * std::max(hm, hp) / diff : (drift == 0.0 ? 0.0 : HUGE_VAL);
        s.max_peclet = std::max(s.max_peclet, peclet);
        double l = 2.0 * diff / (hm * (hm + hp));
        double r = 2.0 * diff / (hp * (hm + hp));
        if (peclet <= 2.0) {
            l -= drift * hp / (hm * (hm + hp));
            r += drift * hm / (hp * (hm + hp));
        } else {
            ++s.upwinded_cells;
            if (drift > 0.0) r += drift / hp;
            else l -= drift / hm;
        }
        lo[j] = l;
        up[j] = r;
        di[j] = -(l + r);
    }

    const double left = p.bc == BoundaryCase::RightOnly ? 0.0 : 1.0;
    const double right = p.bc == BoundaryCase::LeftOnly ? 0.0 : 1.0;
    const double dt = p.t_final / p.nt;

    s.t.resize(static_cast<std::size_t>(p.nt) + 1);
    for (int k = 0; k <= p.nt; ++k) s.t[static_cast<std::size_t>(k)] = dt * k;
    s.t.back() = p.t_final;
    s.u.assign(s.t.size(), std::vector<double>(n, 0.0));

    std::vector<double> cur(n, 0.0);
    std::vector<double> a(m), d(m), c(m), rhs(m);
    auto advance = [&](double theta, double k) {
        for (std::size_t j = 0; j < m; ++j) {
            const std::size_t i = j + 1;
            const double lu = lo[j] * cur[i - 1] + di[j] * cur[i] + up[j] * cur[i + 1];
            rhs[j] = cur[i] + (1.0 - theta) * k * lu;
            a[j] = -theta * k * lo[j];
            d[j] = 1.0 - theta * k * di[j];
            c[j] = -theta * k * up[j];
        }
        rhs[0] -= a[0] * left;
        rhs[m - 1] -= c[m - 1] * right;
        thomas(a, d, c, rhs);
        cur[0] = left;
        cur[n - 1] = right;
        for (std::size_t j = 0; j < m; ++j) cur[j + 1] = rhs[j];
    };

    s.u_min = 0.0;
    s.u_max = 0.0;
    for (int step = 1; step <= p.nt; ++step) {
        if (step <= p.startup_steps) {
            advance(1.0, 0.5 * dt);
            advance(1.0, 0.5 * dt);
        } else {
            advance(p.theta, dt);
        }
        const auto [mn, mx] = std::minmax_element(cur.begin(), cur.end());
        s.u_min = std::min(s.u_min, *mn);
        s.u_max = std::max(s.u_max, *mx);
        if (*mn < -1e-6 || *mx > 1.0 + 1e-6) {
            throw NumericalError("solve_forward: u left [0, 1] at t = " + num(s.t[static_cast<std::size_t>(step)]) +
                                 " (min " + num(*mn) + ", max " + num(*mx) + "); dt = " + num(dt) +
                                 ", max Peclet = " + num(s.max_peclet) + ", upwinded cells = " +
                                 std::to_string(s.upwinded_cells) + "; refine the grid or raise theta");
        }
        s.u[static_cast<std::size_t>(step)] = cur;
    }
    return s;
}

DistCurve extract_cdf(const PdeSolution& s, double xi) {
    if (!(xi > s.x.front() && xi < s.x.back())) throw std::invalid_argument("extract_cdf: xi must be interior to the grid");
    DistCurve c;
    c.times = s.t;
    c.cdf.reserve(s.t.size());
    for (std::size_t k = 0; k < s.t.size(); ++k) c.cdf.push_back(s.at(k, xi));
    c.total_mass = c.cdf.back();
    return c;
}

// ---------------------------------------------------------------------------
// Resolvent

void ResolventProblem::validate() const {
    if (c == 0.0) throw std::invalid_argument("ResolventProblem: c must be non-zero");
    if (!(lambda > 0.0)) throw std::invalid_argument("ResolventProblem: lambda must be positive");
    if (!(a >= bshift)) throw std::invalid_argument("ResolventProblem: need a >= bshift");
    if (!(x_lo < x_hi)) throw std::invalid_argument("ResolventProblem: need x_lo < x_hi");
    if (nx < 16) throw std::invalid_argument("ResolventProblem: nx must be at least 16");
}

double ResolventSolution::at(double xv) const { return interpolate(x, w, xv); }

ResolventSolution solve_resolvent_ode(const ResolventProblem& p) {
    p.validate();
    ResolventSolution s;
    s.x = make_space_grid(p.x_lo, p.x_hi, p.nx, Spacing::Uniform);
    s.h = (p.x_hi - p.x_lo) / p.nx;
    const double h = s.h;
    const std::size_t n = s.x.size();
    const double diff = 0.5 * p.c * p.c;

    auto drift_at = [&](double x) {
        try {
            return p.g(x) + p.a - p.bshift;
        } catch (const DomainError& e) {
            throw NumericalError("solve_resolvent_ode: g undefined at x = " + num(x) + ": " + e.what());
        }
    };

    // Unknowns w_0 .. w_{n-2}; w_{n-1} = 1.
    const std::size_t m = n - 1;
    std::vector<double> a(m, 0.0), d(m, 0.0), c(m, 0.0), r(m, 0.0);
    for (std::size_t i = 1; i < m; ++i) {
        const double drift = drift_at(s.x[i]);
        double lo = diff / (h * h);
        double up = diff / (h * h);
        if (std::fabs(drift) * h / diff <= 2.0) {
            lo -= drift / (2.0 * h);
            up += drift / (2.0 * h);
        } else {
            ++s.upwinded_cells;
            if (drift > 0.0) up += drift / h;
            else lo -= drift / h;
        }
        a[i] = lo;
        d[i] = -(diff / (h * h)) * 2.0 - p.lambda - (std::fabs(drift) * h / diff <= 2.0 ? 0.0 : std::fabs(drift) / h);
        c[i] = up;
    }
    c[m - 1] = 0.0;
    {
        // w_{n-1} = 1 moves to the right-hand side of the last unknown's row.
        const std::size_t i = m - 1;
        const double drift = drift_at(s.x[i]);
        double up = diff / (h * h);
        if (std::fabs(drift) * h / diff <= 2.0) up += drift / (2.0 * h);
        else if (drift > 0.0) up += drift / h;
        r[i] = -up;
    }

    // Left end: -3 w0 + 4 w1 - w2 = 2 h k w0, with w2 eliminated through row 1.
    const double drift0 = drift_at(s.x[0]);
    const double k = (-drift0 + std::sqrt(drift0 * drift0 + 2.0 * p.c * p.c * p.lambda)) / (p.c * p.c);
    if (m < 3) throw std::invalid_argument("solve_resolvent_ode: grid too small");
    const double g0 = -3.0 - 2.0 * h * k;
    const double g1 = 4.0;
    const double g2 = -1.0;
    // Row 1: a[1] w0 + d[1] w1 + c[1] w2 = r[1].
    if (c[1] == 0.0) throw NumericalError("solve_resolvent_ode: cannot eliminate the outflow condition");
    const double f = g2 / c[1];
    d[0] = g0 - f * a[1];
    c[0] = g1 - f * d[1];
    r[0] = -f * r[1];
    a[0] = 0.0;

    thomas(a, d, c, r);
    s.w.assign(n, 1.0);
    for (std::size_t i = 0; i < m; ++i) s.w[i] = r[i];
    for (double v : s.w) {
        if (!std::isfinite(v) || v < -1e-12 || v > 1.0 + 1e-12)
            throw NumericalError("solve_resolvent_ode: solution left [0, 1] (value " + num(v) + "); refine the grid");
    }
    return s;
}

double traveling_wave_check(const ResolventSolution& w, double bshift, double t, double x) {
    const double y = x - bshift * t;
    if (!(y >= w.x.front() && y <= w.x.back())) throw std::invalid_argument("traveling_wave_check: x - bshift t outside the grid");
    return w.at(y);
}

double traveling_wave_residual(const ResolventSolution& w, const ResolventProblem& p, int time_steps, int stencil) {
    if (time_steps < 1 || stencil < 1) throw std::invalid_argument("traveling_wave_residual: bad step counts");
    const int n = static_cast<int>(w.x.size());
    const double hx = stencil * w.h;
    const double dt = p.bshift != 0.0 ? hx / std::fabs(p.bshift) : hx;
    const int dir = p.bshift > 0.0 ? 1 : (p.bshift < 0.0 ? -1 : 0);
    const double diff = 0.5 * p.c * p.c;
    double worst = 0.0;
    // Keep clear of the left end, where the outflow closure is only asymptotic.
    const int first = std::max(2 * stencil, n / 10);
    for (int j = 1; j <= time_steps; ++j) {
        const double t = j * dt;
        for (int i = first; i + stencil < n; ++i) {
            const auto W = [&](int idx) { return w.w[static_cast<std::size_t>(idx)]; };
            const double x = w.x[static_cast<std::size_t>(i)] + p.bshift * t;
            // u(t +- dt, x) = w(x_i -+ dir * stencil h).
            const double later = W(i - dir * stencil);
            const double earlier = W(i + dir * stencil);
            const double u_t = (later - earlier) / (2.0 * dt);
            const double u_x = (W(i + stencil) - W(i - stencil)) / (2.0 * hx);
            const double u_xx = (W(i + stencil) - 2.0 * W(i) + W(i - stencil)) / (hx * hx);
            const double coef = p.g(x - p.bshift * t) + p.a;
            const double res = -u_t - diff * u_xx - coef * u_x + p.lambda * W(i);
            worst = std::max(worst, std::fabs(res));
        }
    }
    return worst;
}

double laplace_from_cdf(const DistCurve& curve, double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("laplace_from_cdf: lambda must be positive");
    if (curve.times.empty() || curve.times.size() != curve.cdf.size())
        throw std::invalid_argument("laplace_from_cdf: malformed curve");
    const auto& t = curve.times;
    const auto& F = curve.cdf;
    // Before the grid: constant F[0] over [0, t0].
    double total = F.front() * -std::expm1(-lambda * t.front());
    for (std::size_t i = 1; i < t.size(); ++i) {
        const double h = t[i] - t[i - 1];
        if (!(h > 0.0)) throw std::invalid_argument("laplace_from_cdf: times must increase");
        // lambda * integral over the cell of a linear F against e^{-lambda u}, exactly.
        const double e0 = std::exp(-lambda * t[i - 1]);
        const double z = lambda * h;
        const double em = -std::expm1(-z);  // 1 - e^{-z}
        // Weights of F[i-1] and F[i]: integral of (1 - s) and s against lambda h e^{-z s} ds.
        double w1;
        if (z < 1e-4) w1 = z * (0.5 - z / 3.0 + z * z / 8.0);
        else w1 = (em - z * std::exp(-z)) / z;
        const double w0 = em - w1;
        total += e0 * (w0 * F[i - 1] + w1 * F[i]);
    }
    total += F.back() * std::exp(-lambda * t.back());
    return total;
}

}  // namespace blowup
