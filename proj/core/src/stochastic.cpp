#include "blowup/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <stdexcept>

#include "blowup/errors.hpp"
#include "blowup/quadrature.hpp"
#include "blowup/rng.hpp"
#include "json.hpp"

namespace blowup {

namespace {

constexpr QuadratureOptions kCellQuad{1e-13, 1e-12, 2000};

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

RealFunction squared(const FunctionExpr& f) {
    return [f](double s) {
        const double v = f(s);
        return v * v;
    };
}

// Integral of f^2 over [a, b]; +inf once it overflows.
double square_integral(const FunctionExpr& f, double a, double b) {
    if (b <= a) return 0.0;
    if (auto c = f.constant_value()) return (*c) * (*c) * (b - a);
    const QuadratureResult q = integrate(squared(f), a, b, kCellQuad);
    return q.value;
}

}  // namespace

// ---------------------------------------------------------------------------
// Sample pools

std::size_t SamplePool::exploded() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(samples.begin(), samples.end(), [](const ExplosionSample& s) { return !s.censored; }));
}

std::string SamplePool::to_csv() const {
    std::string out = "time,censored\n";
    out.reserve(samples.size() * 26);
    for (const auto& s : samples) out += num(s.time) + (s.censored ? ",1\n" : ",0\n");
    return out;
}

std::string SamplePool::sidecar_json() const {
    nlohmann::ordered_json j;
    j["seed"] = seed;
    j["scheme"] = scheme;
    j["t_max"] = t_max;
    if (threshold) j["threshold"] = *threshold;
    else j["threshold"] = nullptr;
    j["step_policy"] = step_policy;
    j["n_paths"] = samples.size();
    j["exploded"] = exploded();
    return j.dump(2);
}

DistCurve empirical_cdf(const SamplePool& pool, const std::vector<double>& grid) {
    if (pool.samples.empty()) throw std::invalid_argument("empirical_cdf: empty pool");
    if (grid.empty()) throw std::invalid_argument("empirical_cdf: empty grid");
    std::vector<double> times;
    times.reserve(pool.samples.size());
    for (const auto& s : pool.samples)
        if (!s.censored) times.push_back(s.time);
    std::sort(times.begin(), times.end());
    const double n = static_cast<double>(pool.samples.size());
    DistCurve c;
    c.times = grid;
    for (double t : grid) {
        const double cut = t + 1e-12 * std::fabs(t);
        const auto k = std::upper_bound(times.begin(), times.end(), cut) - times.begin();
        const double p = static_cast<double>(k) / n;
        c.cdf.push_back(p);
        c.std_errors.push_back(std::sqrt(p * (1.0 - p) / n));
    }
    c.censored_mass = (n - static_cast<double>(times.size())) / n;
    c.total_mass = c.cdf.back();
    return c;
}

// ---------------------------------------------------------------------------
// H4

double upsilon(const FunctionExpr& f, double t) {
    if (!(t >= 0.0)) throw std::invalid_argument("upsilon: t must be non-negative");
    const double F = square_integral(f, 0.0, t);
    if (std::isinf(F)) return HUGE_VAL;
    const double guard = std::exp(std::numbers::e);
    return std::sqrt(2.0 * F * std::log(std::log(std::max(guard, F))));
}

std::string_view to_string(H4Status s) {
    switch (s) {
        case H4Status::Holds: return "Holds";
        case H4Status::Fails: return "Fails";
        case H4Status::Unknown: return "Unknown";
    }
    return "Unknown";
}

std::string H4Report::to_json() const {
    nlohmann::ordered_json j;
    j["verdict"] = std::string(to_string(verdict));
    j["M"] = M;
    j["p"] = p;
    j["route"] = route;
    j["integral_f2"] = {{"kind", std::string(to_string(integral_infinite.kind))}, {"rule", integral_infinite.rule}};
    j["series"] = std::string(to_string(series));
    j["terms_evaluated"] = series_terms.size();
    if (!partial_sums.empty()) j["last_partial_sum"] = partial_sums.back();
    j["evidence"] = evidence;
    return j.dump(2);
}

namespace {

double ls_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(xs.size());
    my /= static_cast<double>(xs.size());
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    return sxy / sxx;
}

// Decreasing-ratio sufficient condition: rho(t) = (integral_t^{t+2} f^2) / (integral_0^t f^2)
// non-increasing on [M, inf) and rho^{p/2} integrable there. Each series term is at most
// (rho(n)/2)^{p/2}, and for decreasing rho the sum is bounded by the integral.
bool ratio_fast_path(const FunctionExpr& f, double M, double p, std::vector<std::string>& ev) {
    auto rho = [&f](double t) {
        const double F = square_integral(f, 0.0, t);
        const double G = square_integral(f, t, t + 2.0);
        if (!(F > 0.0) || std::isinf(F) || std::isinf(G)) throw DomainError("ratio undefined at t = " + num(t));
        return G / F;
    };
    try {
        std::vector<double> pts;
        for (int j = 0; j <= 200; ++j) pts.push_back(M + 0.25 * j);
        for (int k = 1; k <= 30; ++k) pts.push_back(std::max(M, 1.0) * std::ldexp(1.0, k));
        std::sort(pts.begin(), pts.end());
        double prev = rho(pts.front());
        for (std::size_t i = 1; i < pts.size(); ++i) {
            const double v = rho(pts[i]);
            if (v > prev * (1.0 + 1e-9)) {
                ev.push_back("ratio increases between t=" + num(pts[i - 1]) + " and t=" + num(pts[i]));
                return false;
            }
            prev = v;
        }
        const ImproperVerdict iv = classify_improper([&](double t) { return std::pow(rho(t), 0.5 * p); }, M);
        ev.push_back("ratio^(p/2) integral over [M, inf): " + std::string(to_string(iv.kind)) + " (" + iv.rule + ")");
        return iv.convergent();
    } catch (const Error& e) {
        ev.push_back(std::string("ratio test not applicable: ") + e.what());
        return false;
    }
}

}  // namespace

H4Report check_H4(const FunctionExpr& f, double M, double p, const H4Options& opts) {
    if (!(p > 0.0)) throw std::invalid_argument("check_H4: p must be positive");
    if (!(M >= 0.0)) throw std::invalid_argument("check_H4: M must be non-negative");
    if (opts.n_max < M + 8) throw std::invalid_argument("check_H4: n_max too small");
    H4Report rep;
    rep.M = M;
    rep.p = p;
    auto& ev = rep.evidence;

    rep.integral_infinite = classify_improper(squared(f), 0.0);
    ev.push_back("integral of f^2 over [0, inf): " + std::string(to_string(rep.integral_infinite.kind)) + " (" +
                 rep.integral_infinite.rule + ")");

    // Series terms with unit cells: F(n) accumulates, G(n) = c_n + c_{n+1}.
    const int count = static_cast<int>(std::floor(opts.n_max - M)) + 1;
    std::vector<double> cells;
    double F = 0.0;
    bool overflow = false;
    try {
        F = square_integral(f, 0.0, M);
        cells.reserve(static_cast<std::size_t>(count) + 1);
        for (int j = 0; j <= count; ++j) {
            const double c = square_integral(f, M + j, M + j + 1);
            cells.push_back(c);
            if (std::isinf(c)) {
                overflow = true;
                break;
            }
        }
    } catch (const Error& e) {
        ev.push_back(std::string("series evaluation failed: ") + e.what());
        overflow = std::isinf(F);
    }
    const double guard = std::exp(std::numbers::e);
    double sum = 0.0;
    for (std::size_t j = 0; j + 1 < cells.size(); ++j) {
        const double G = cells[j] + cells[j + 1];
        double term;
        if (std::isinf(G) || std::isinf(F)) {
            term = HUGE_VAL;
        } else if (G == 0.0) {
            term = 0.0;
        } else if (F == 0.0) {
            term = HUGE_VAL;
        } else {
            const double u2 = 2.0 * F * std::log(std::log(std::max(guard, F)));
            term = std::exp(0.5 * p * (std::log(G) - std::log(u2)));
        }
        rep.series_terms.push_back(term);
        sum += term;
        rep.partial_sums.push_back(sum);
        if (std::isinf(term)) {
            overflow = true;
            break;
        }
        F += cells[j];
    }

    if (overflow || rep.series_terms.size() < 8) {
        rep.series = overflow ? ImproperKind::Divergent : ImproperKind::Unknown;
        if (overflow) ev.push_back("series term overflows at n = " + num(M + static_cast<double>(rep.series_terms.size()) - 1));
    } else {
        // Log-log slope of the terms over the last decade of n.
        const std::size_t last = rep.series_terms.size() - 1;
        const double n_hi = M + static_cast<double>(last);
        std::vector<double> lx, ly;
        bool zero_tail = true;
        for (int k = 0; k < 8; ++k) {
            const double n = n_hi * std::pow(10.0, -1.0 + k / 7.0);
            const std::size_t j = static_cast<std::size_t>(std::clamp(std::round(n - M), 0.0, static_cast<double>(last)));
            const double term = rep.series_terms[j];
            if (term > 0.0) {
                zero_tail = false;
                lx.push_back(std::log(M + static_cast<double>(j)));
                ly.push_back(std::log(term));
            }
        }
        if (zero_tail) {
            rep.series = ImproperKind::Convergent;
            ev.push_back("series terms vanish in the last decade");
        } else if (lx.size() >= 6) {
            const double slope = ls_slope(lx, ly);
            const std::size_t h = lx.size() / 2;
            const double s1 = ls_slope({lx.begin(), lx.begin() + static_cast<long>(h)}, {ly.begin(), ly.begin() + static_cast<long>(h)});
            const double s2 = ls_slope({lx.begin() + static_cast<long>(h), lx.end()}, {ly.begin() + static_cast<long>(h), ly.end()});
            const bool stable = std::fabs(s1 - s2) <= opts.divergent_margin;
            ev.push_back("series terms decay like n^" + num(slope) + (stable ? "" : " (unstable fit)"));
            if (stable && slope <= -1.0 - opts.convergent_margin) rep.series = ImproperKind::Convergent;
            else if (stable && slope >= -1.0 + opts.divergent_margin) rep.series = ImproperKind::Divergent;
        }
    }

    const bool fast = !overflow && ratio_fast_path(f, M, p, ev);
    if (fast) {
        rep.route = "ratio";
        rep.series = ImproperKind::Convergent;
    } else {
        rep.route = "series";
    }
    ev.push_back("series over n >= " + num(M) + " with p = " + num(p) + ": " + std::string(to_string(rep.series)));

    if (rep.integral_infinite.convergent() || rep.series == ImproperKind::Divergent) rep.verdict = H4Status::Fails;
    else if (rep.integral_infinite.divergent() && rep.series == ImproperKind::Convergent) rep.verdict = H4Status::Holds;
    else rep.verdict = H4Status::Unknown;
    return rep;
}

H4Report scan_H4(const FunctionExpr& f, const H4Options& opts) {
    H4Report last;
    bool all_fail = true;
    for (double M : {1.0, 2.0, 4.0, 8.0}) {
        for (double p : {1.0, 2.0, 4.0}) {
            last = check_H4(f, M, p, opts);
            if (last.verdict == H4Status::Holds) return last;
            if (last.verdict != H4Status::Fails) all_fail = false;
        }
    }
    if (!all_fail) last.verdict = H4Status::Unknown;
    last.evidence.push_back(all_fail ? "every (M, p) on the lattice fails" : "no (M, p) on the lattice succeeded");
    return last;
}

// ---------------------------------------------------------------------------
// Paths

std::string SdeReport::to_json() const {
    auto j = nlohmann::ordered_json::parse(osgood.to_json());
    if (h4) j["h4"] = nlohmann::ordered_json::parse(h4->to_json());
    return j.dump(2);
}

SdeReport sde_verdict(const OsgoodProblem& p, const NoiseSpec& noise, const H4Options& opts, bool assume_hypotheses) {
    SdeReport rep;
    OsgoodProblem q = p;
    VerdictOptions vo;
    vo.assume_hypotheses = assume_hypotheses;
    const auto c = noise.f.constant_value();
    if (c && *c == 0.0) {
        q.g = std::monostate{};
        rep.osgood = osgood_verdict(q, vo);
        return rep;
    }
    rep.h4 = scan_H4(noise.f, opts);
    HypothesisCheck h3;
    h3.name = "H3 (from H4)";
    h3.passed = rep.h4->verdict == H4Status::Holds;
    h3.evidence.push_back("H4 at M = " + num(rep.h4->M) + ", p = " + num(rep.h4->p) + ": " +
                          std::string(to_string(rep.h4->verdict)) + " via " + rep.h4->route);
    h3.evidence.insert(h3.evidence.end(), rep.h4->evidence.begin(), rep.h4->evidence.end());
    vo.h3_substitute = h3;
    q.g = FunctionNoise{noise.f};
    rep.osgood = osgood_verdict(q, vo);
    return rep;
}

std::vector<double> sample_wiener_path(const FunctionExpr& f, const std::vector<double>& grid, std::uint64_t seed,
                                       std::uint64_t index) {
    if (grid.empty() || grid.front() != 0.0) throw std::invalid_argument("sample_wiener_path: grid must start at 0");
    auto rng = make_stream(seed, index, 0);
    std::normal_distribution<double> normal;
    std::vector<double> path(grid.size(), 0.0);
    for (std::size_t k = 1; k < grid.size(); ++k) {
        if (!(grid[k] > grid[k - 1])) throw std::invalid_argument("sample_wiener_path: grid must increase");
        const double var = square_integral(f, grid[k - 1], grid[k]);
        if (!std::isfinite(var)) throw NumericalError("sample_wiener_path: f^2 is not integrable on the grid");
        path[k] = path[k - 1] + std::sqrt(var) * normal(rng);
    }
    return path;
}

double frequency_above(const FunctionExpr& f, double xi, double r, double horizon, double step, std::size_t n_paths,
                       std::uint64_t seed) {
    if (!(horizon > 0.0) || !(step > 0.0) || n_paths == 0)
        throw std::invalid_argument("frequency_above: need positive horizon, step and path count");
    std::vector<double> grid;
    const std::size_t n = static_cast<std::size_t>(std::ceil(horizon / step));
    for (std::size_t k = 0; k <= n; ++k) grid.push_back(std::min(horizon, static_cast<double>(k) * step));
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n_paths; ++i) {
        const auto path = sample_wiener_path(f, grid, seed, i);
        if (xi + *std::min_element(path.begin(), path.end()) > r) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(n_paths);
}

// ---------------------------------------------------------------------------
// Brownian exit

namespace {

struct ExitResult {
    double clock = 0.0;
    bool exited = false;
};

ExitResult brownian_exit_path(const BarrierPair& bp, double horizon, double step, bool bridge, std::uint64_t seed,
                              std::uint64_t index) {
    auto normals = make_stream(seed, index, 0);
    auto uniforms = make_stream(seed, index, 1);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> uniform;
    const bool has_r = bp.r.is_finite();
    const bool has_l = bp.l.is_finite();
    const double r = has_r ? bp.r.value() : 0.0;
    const double l = has_l ? bp.l.value() : 0.0;
    const auto steps = static_cast<std::size_t>(std::ceil(horizon / step * (1.0 - 1e-12)));
    double b = 0.0;
    for (std::size_t k = 0; k < steps; ++k) {
        const double c0 = static_cast<double>(k) * step;
        const double c1 = (k + 1 == steps) ? horizon : static_cast<double>(k + 1) * step;
        const double d = c1 - c0;
        const double next = b + std::sqrt(d) * normal(normals);
        if ((has_r && next >= r) || (has_l && next <= l)) return {c1, true};
        if (bridge) {
            double stay = 1.0;
            if (has_r) {
                const double e = 2.0 * (r - b) * (r - next) / d;
                if (e < 40.0) stay *= 1.0 - std::exp(-e);
            }
            if (has_l) {
                const double e = 2.0 * (b - l) * (next - l) / d;
                if (e < 40.0) stay *= 1.0 - std::exp(-e);
            }
            if (stay < 1.0 && uniform(uniforms) >= stay) return {c1, true};
        }
        b = next;
    }
    return {horizon, false};
}

double resolve_step(double clock_step, double horizon) {
    const double step = clock_step > 0.0 ? clock_step : 1e-4 * horizon;
    if (!(step > 0.0)) throw std::invalid_argument("exit simulation: step must be positive");
    return step;
}

}  // namespace

SamplePool simulate_brownian_exit(const BarrierPair& barriers, double clock_horizon, const ExitOptions& opts) {
    if (barriers.both_infinite()) throw DomainError("both barriers are infinite; nothing to detect");
    if (!(clock_horizon > 0.0)) throw std::invalid_argument("simulate_brownian_exit: horizon must be positive");
    if (opts.n_paths == 0) throw std::invalid_argument("simulate_brownian_exit: need at least one path");
    const double step = resolve_step(opts.clock_step, clock_horizon);
    SamplePool pool;
    pool.seed = opts.seed;
    pool.scheme = opts.bridge ? "brownian-exit" : "brownian-exit-nobridge";
    pool.t_max = clock_horizon;
    pool.step_policy = "uniform clock step " + num(step);
    pool.samples.resize(opts.n_paths);
    parallel_for(opts.n_paths, opts.workers, [&](std::size_t i) {
        const ExitResult e = brownian_exit_path(barriers, clock_horizon, step, opts.bridge, opts.seed, i);
        pool.samples[i] = (e.exited && e.clock < clock_horizon) ? ExplosionSample{e.clock, false}
                                                                 : ExplosionSample{clock_horizon, true};
    });
    return pool;
}

SamplePool simulate_exit_transformed(const TransformProblem& p, const BarrierPair& barriers, double t_max,
                                     const ExitOptions& opts) {
    if (barriers.both_infinite()) throw DomainError("both barriers are infinite; nothing to detect");
    if (!(t_max > 0.0)) throw std::invalid_argument("simulate_exit_transformed: t_max must be positive");
    if (opts.n_paths == 0) throw std::invalid_argument("simulate_exit_transformed: need at least one path");
    const TimeChange clock(p.h(), t_max, 1024);
    const double horizon = clock.horizon_value();

    SamplePool pool;
    pool.seed = opts.seed;
    pool.scheme = opts.bridge ? "transformed-exit" : "transformed-exit-nobridge";
    pool.t_max = t_max;
    pool.samples.assign(opts.n_paths, ExplosionSample{t_max, true});
    if (!(horizon > 0.0)) {
        pool.step_policy = "clock horizon is 0; no motion";
        return pool;
    }
    const double step = resolve_step(opts.clock_step, horizon);
    pool.step_policy = "uniform clock step " + num(step) + " over H(t_max) = " + num(horizon);
    parallel_for(opts.n_paths, opts.workers, [&](std::size_t i) {
        const ExitResult e = brownian_exit_path(barriers, horizon, step, opts.bridge, opts.seed, i);
        if (!e.exited || !(e.clock < horizon)) return;
        const double t = clock.inverse(e.clock);
        if (t < t_max) pool.samples[i] = {t, false};
    });
    return pool;
}

// ---------------------------------------------------------------------------
// Euler

namespace {

struct EulerGrid {
    std::vector<double> ends;       // right end of each base cell
    std::vector<double> variances;  // Var of I over each cell
};

EulerGrid make_grid(const NoiseSpec& noise, const EulerOptions& o) {
    if (!(o.t_max > 0.0) || !(o.base_step > 0.0)) throw std::invalid_argument("euler: t_max and base_step must be positive");
    if (!(o.threshold >= 1e6)) throw std::invalid_argument("euler: explosion threshold must be at least 1e6");
    if (!(o.min_step > 0.0)) throw std::invalid_argument("euler: min_step must be positive");
    EulerGrid g;
    const auto cells = static_cast<std::size_t>(std::ceil(o.t_max / o.base_step * (1.0 - 1e-12)));
    g.ends.resize(cells);
    g.variances.resize(cells);
    for (std::size_t k = 0; k < cells; ++k) {
        const double a = static_cast<double>(k) * o.base_step;
        const double b = (k + 1 == cells) ? o.t_max : static_cast<double>(k + 1) * o.base_step;
        g.ends[k] = b;
        g.variances[k] = square_integral(noise.f, a, b);
        if (!std::isfinite(g.variances[k])) throw NumericalError("euler: f^2 is not integrable on [" + num(a) + ", " + num(b) + "]");
    }
    return g;
}

std::optional<double> run_euler(const OsgoodProblem& p, const EulerGrid& grid, const EulerOptions& o, std::size_t index,
                                EulerPath* record) {
    auto rng = make_stream(o.seed, index, 0);
    std::normal_distribution<double> normal;
    double x = p.xi;
    double s = 0.0;
    if (record) {
        record->times.push_back(0.0);
        record->values.push_back(x);
    }
    for (std::size_t k = 0; k < grid.ends.size(); ++k) {
        const double t1 = grid.ends[k];
        const double t0 = s;
        const double cell = t1 - t0;
        const double dI = std::sqrt(grid.variances[k]) * normal(rng);
        while (s < t1) {
            const double rem = t1 - s;
            double drift;
            try {
                drift = o.drift_scale * p.a(s) * p.b(x);
            } catch (const DomainError& e) {
                throw NumericalError("euler: drift undefined at t = " + num(s) + ", x = " + num(x) + ": " + e.what());
            }
            if (std::isinf(drift)) return s;
            const double limit = 0.1 * (1.0 + std::fabs(x));
            double dt = rem;
            while (std::fabs(drift) * dt > limit && dt > o.min_step) dt *= 0.5;
            if (std::fabs(drift) * dt > limit) return s;  // step floor reached
            const bool last = dt == rem;
            x += drift * dt + dI * (dt / cell);
            s = last ? t1 : s + dt;
            if (!std::isfinite(x) || std::fabs(x) > o.threshold) return s;
        }
        if (record) {
            record->times.push_back(t1);
            record->values.push_back(x);
        }
    }
    return std::nullopt;
}

}  // namespace

SamplePool simulate_sde_euler(const OsgoodProblem& p, const NoiseSpec& noise, const EulerOptions& opts) {
    if (opts.n_paths == 0) throw std::invalid_argument("simulate_sde_euler: need at least one path");
    const EulerGrid grid = make_grid(noise, opts);
    SamplePool pool;
    pool.seed = opts.seed;
    pool.scheme = "euler";
    pool.t_max = opts.t_max;
    pool.threshold = opts.threshold;
    pool.step_policy = "base step " + num(opts.base_step) + ", drift step halved until a*b*dt <= 0.1*(1+|X|), floor " +
                       num(opts.min_step);
    pool.samples.resize(opts.n_paths);
    parallel_for(opts.n_paths, opts.workers, [&](std::size_t i) {
        const auto t = run_euler(p, grid, opts, i, nullptr);
        pool.samples[i] = (t && *t < opts.t_max) ? ExplosionSample{*t, false} : ExplosionSample{opts.t_max, true};
    });
    return pool;
}

EulerPath euler_path(const OsgoodProblem& p, const NoiseSpec& noise, const EulerOptions& opts, std::size_t index) {
    const EulerGrid grid = make_grid(noise, opts);
    EulerPath path;
    path.explosion_time = run_euler(p, grid, opts, index, &path);
    return path;
}

}  // namespace blowup
