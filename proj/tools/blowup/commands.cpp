#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "blowup/analytic.hpp"
#include "blowup/dist_curve.hpp"
#include "blowup/errors.hpp"
#include "blowup/osgood.hpp"
#include "blowup/pde.hpp"
#include "blowup/stochastic.hpp"
#include "blowup/version.hpp"
#include "log.hpp"

namespace cli {

using blowup::BarrierPair;
using blowup::DistCurve;
using blowup::ExtReal;
using blowup::FunctionExpr;
using blowup::TransformProblem;
using json = nlohmann::ordered_json;

namespace {

json ext_json(const ExtReal& v) {
    if (v.is_finite()) return v.value();
    return v.to_string();
}

json improper_json(const blowup::ImproperVerdict& v) {
    json j;
    j["kind"] = std::string(blowup::to_string(v.kind));
    if (v.convergent()) j["value"] = v.value;
    j["rule"] = v.rule;
    return j;
}

json meta(const Context& ctx) {
    return {{"config_hash", ctx.config.hash()}, {"library_version", std::string(blowup::library_version())}};
}

std::vector<std::pair<std::string, std::string>> csv_header(const Context& ctx, const std::string& what) {
    return {{"config_hash", ctx.config.hash()},
            {"library_version", std::string(blowup::library_version())},
            {"content", what}};
}

void write_file(const Context& ctx, const std::string& name, const std::string& text) {
    std::filesystem::create_directories(ctx.out_dir);
    const auto path = std::filesystem::path(ctx.out_dir) / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << text;
    info("wrote " + path.string());
}

// Merges the library's JSON text with the run metadata and prints/writes it.
json with_meta(const Context& ctx, const std::string& library_json) {
    json j = meta(ctx);
    const json lib = json::parse(library_json);
    for (const auto& [k, v] : lib.items()) j[k] = v;
    return j;
}

void emit(const Context& ctx, const std::string& file, const json& j) {
    const std::string text = j.dump(2) + "\n";
    write_file(ctx, file, text);
    std::cout << text;
}

std::string problem_class(const Config& c) {
    const std::string p = c.str("problem");
    if (p != "transform" && p != "osgood" && p != "diffusion")
        throw ConfigError("problem must be transform, osgood or diffusion, got '" + p + "'");
    return p;
}

std::optional<double> tail_hint(const Config& c) { return c.opt_num("tail_exponent_hint"); }

// ---------------------------------------------------------------------------
// Problem builders

TransformProblem transform_problem(const Config& c) {
    try {
        return TransformProblem(c.expr("sigma", "x"), c.expr("h", "t", "1"), c.num("xi"),
                                c.ext("x1", ExtReal::neg_inf()), c.ext("x2", ExtReal::pos_inf()));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

blowup::PsiHints psi_hints(const Config& c) {
    blowup::PsiHints h;
    h.toward_x1 = c.opt_num("hint_x1");
    h.toward_x2 = c.opt_num("hint_x2");
    if (const auto p = tail_hint(c)) {
        if (!h.toward_x1) h.toward_x1 = p;
        if (!h.toward_x2) h.toward_x2 = p;
    }
    return h;
}

blowup::OsgoodProblem osgood_problem(const Config& c) {
    blowup::OsgoodProblem p;
    p.a = c.expr("a", "t", "1");
    p.b = c.expr("b", "x");
    p.xi = c.num("xi");
    p.r = c.num("r", 0.0);
    p.l = c.ext("l", ExtReal::neg_inf());
    p.tail_exponent_hint = tail_hint(c);
    p.eta = c.num("eta", 1.0);
    p.eta_tilde = c.num("eta_tilde", 1.0);
    p.h3_threshold = c.num("h3_threshold", 10.0);
    p.h3_horizon = c.num("h3_horizon", 1e4);
    const std::string noise = c.str("noise", "none");
    if (noise == "none" || noise == "wiener") {
        p.g = std::monostate{};
    } else if (noise == "bounded") {
        p.g = blowup::BoundedNoise{c.num("g_inf"), c.num("g_sup")};
    } else if (noise == "function") {
        p.g = blowup::FunctionNoise{c.expr("g", "t")};
    } else {
        throw ConfigError("noise must be none, bounded, function or wiener, got '" + noise + "'");
    }
    try {
        p.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return p;
}

bool wiener_noise(const Config& c) { return c.str("noise", "none") == "wiener"; }

blowup::NoiseSpec noise_spec(const Config& c) {
    blowup::NoiseSpec n;
    if (wiener_noise(c)) n.f = c.expr("f", "t");
    return n;
}

blowup::H4Options h4_options(const Config& c) {
    blowup::H4Options o;
    o.n_max = static_cast<int>(c.integer("n_max", o.n_max));
    return o;
}

std::vector<double> time_grid(const Config& c) {
    std::vector<double> t;
    if (c.has("times")) {
        t = c.list("times");
    } else {
        const double t_max = c.num("t_max");
        const long long n = c.integer("n_times", 100);
        if (n < 1) throw ConfigError("n_times must be positive");
        for (long long k = 1; k <= n; ++k) t.push_back(t_max * static_cast<double>(k) / static_cast<double>(n));
    }
    for (std::size_t k = 0; k < t.size(); ++k)
        if (!(t[k] > 0.0) || (k > 0 && !(t[k] > t[k - 1])))
            throw ConfigError("time grid must be positive and increasing");
    return t;
}

blowup::ExitOptions exit_options(const Config& c) {
    blowup::ExitOptions o;
    o.n_paths = static_cast<std::size_t>(c.integer("n_paths", 100000));
    o.seed = c.seed();
    o.clock_step = c.num("clock_step", 0.0);
    o.bridge = c.flag("bridge", true);
    o.workers = static_cast<unsigned>(c.integer("workers", 0));
    return o;
}

blowup::EulerOptions euler_options(const Config& c, double t_max) {
    blowup::EulerOptions o;
    o.n_paths = static_cast<std::size_t>(c.integer("n_paths", 1000));
    o.seed = c.seed();
    o.t_max = t_max;
    o.threshold = c.num("threshold", o.threshold);
    o.base_step = c.num("base_step", o.base_step);
    o.min_step = c.num("min_step", o.min_step);
    o.workers = static_cast<unsigned>(c.integer("workers", 0));
    return o;
}

BarrierPair barriers_or_throw(const TransformProblem& p, const Config& c) {
    const auto lim = blowup::psi_limits(p, psi_hints(c));
    if (!lim.barriers)
        throw blowup::DomainError("barriers undecided: toward x1 " + lim.toward_x1.rule + "; toward x2 " +
                                  lim.toward_x2.rule);
    if (lim.barriers->l.is_neg_inf() && lim.barriers->r.is_pos_inf())
        throw ConfigError("no explosion; no distribution (both barriers are infinite)");
    return *lim.barriers;
}

// PDE for the transform problem: generator (1/2) sigma^2 u'' + (1/2) sigma sigma' u'.
blowup::PdeProblem pde_problem(const Config& c) {
    blowup::PdeProblem p;
    const std::string cls = problem_class(c);
    if (cls == "transform") {
        const auto tp = transform_problem(c);
        const auto h = tp.h().constant_value();
        if (!h || *h != 1.0) throw ConfigError("the pde route needs a time-homogeneous problem (h = 1)");
        p.sigma = tp.sigma();
        p.b = tp.sigma() * tp.sigma().derivative() / FunctionExpr::constant(2.0);
        if (!c.has("pde_bc")) {
            const auto lim = blowup::psi_limits(tp, psi_hints(c));
            const bool left = lim.toward_x1.convergent(), right = lim.toward_x2.convergent();
            if (!left && !right) throw ConfigError("no explosion; no distribution (both barriers are infinite)");
            p.bc = left && right ? blowup::BoundaryCase::Both1
                   : right       ? blowup::BoundaryCase::RightOnly
                                 : blowup::BoundaryCase::LeftOnly;
        }
    } else if (cls == "diffusion") {
        p.sigma = c.expr("sigma", "x");
        p.b = c.expr("b", "x", "0");
    } else {
        throw ConfigError("the pde route is available for transform and diffusion problems");
    }
    if (c.has("pde_bc")) {
        try {
            p.bc = blowup::parse_boundary_case(c.str("pde_bc"));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }
    p.x_lo = c.num("pde_x_lo");
    p.x_hi = c.num("pde_x_hi");
    p.nx = static_cast<int>(c.integer("pde_nx", 400));
    p.nt = static_cast<int>(c.integer("pde_nt", 400));
    p.theta = c.num("pde_theta", 0.5);
    p.startup_steps = static_cast<int>(c.integer("pde_startup_steps", 2));
    const std::string spacing = c.str("pde_spacing", "uniform");
    if (spacing == "uniform") p.spacing = blowup::Spacing::Uniform;
    else if (spacing == "geometric") p.spacing = blowup::Spacing::Geometric;
    else throw ConfigError("pde_spacing must be uniform or geometric");
    try {
        p.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return p;
}

// ---------------------------------------------------------------------------
// Distribution routes

struct Route {
    std::string name;
    DistCurve curve;
};

Route analytic_route(const Config& c, const std::vector<double>& times) {
    if (problem_class(c) != "transform") throw ConfigError("method analytic needs problem = transform");
    const auto p = transform_problem(c);
    const auto bp = barriers_or_throw(p, c);
    return {"analytic", blowup::analytic_distribution(p, bp, times)};
}

Route mc_route(const Config& c, const std::vector<double>& times) {
    const std::string cls = problem_class(c);
    const double horizon = c.num("mc_t_max", times.back() * (1.0 + 1e-3));
    if (cls == "transform") {
        const auto p = transform_problem(c);
        const auto bp = barriers_or_throw(p, c);
        const auto pool = blowup::simulate_exit_transformed(p, bp, horizon, exit_options(c));
        return {"mc", blowup::empirical_cdf(pool, times)};
    }
    if (cls == "osgood") {
        const auto pool =
            blowup::simulate_sde_euler(osgood_problem(c), noise_spec(c), euler_options(c, horizon));
        return {"mc", blowup::empirical_cdf(pool, times)};
    }
    throw ConfigError("method mc needs problem = transform or osgood");
}

Route pde_route(const Config& c, const std::vector<double>& times) {
    auto p = pde_problem(c);
    p.t_final = times.back();
    const auto sol = blowup::solve_forward(p);
    debug(sol.metadata_json());
    return {"pde", blowup::extract_cdf(sol, c.num("xi"))};
}

std::vector<std::string> methods_for(const Config& c) {
    const std::string m = c.str("method", "analytic");
    if (m == "analytic" || m == "mc" || m == "pde") return {m};
    if (m != "all") throw ConfigError("method must be analytic, mc, pde or all, got '" + m + "'");
    const std::string cls = problem_class(c);
    if (cls == "transform") return {"analytic", "mc", "pde"};
    if (cls == "osgood") return {"mc"};
    return {"pde"};
}

Route run_route(const std::string& m, const Config& c, const std::vector<double>& times) {
    info("running route " + m);
    if (m == "analytic") return analytic_route(c, times);
    if (m == "mc") return mc_route(c, times);
    return pde_route(c, times);
}

double max_se(const DistCurve& c) {
    double s = 0.0;
    for (double v : c.std_errors) s = std::max(s, v);
    return s;
}

// ---------------------------------------------------------------------------
// Resolvent route for laplace

std::optional<blowup::ResolventProblem> resolvent_for(const Config& c, double lambda, double& xi_out) {
    blowup::ResolventProblem r;
    r.lambda = lambda;
    r.nx = static_cast<int>(c.integer("resolvent_nx", 4000));
    if (c.has("resolvent_c")) {
        r.c = c.num("resolvent_c");
        r.a = c.num("resolvent_a", 0.0);
        r.bshift = c.num("resolvent_bshift", 0.0);
        r.g = c.expr("resolvent_g", "x", "0");
        r.x_hi = c.num("resolvent_x_hi");
        xi_out = c.num("resolvent_xi", c.num("xi"));
        r.x_lo = c.num("resolvent_x_lo", std::min(xi_out, r.x_hi) - 12.0 * std::fabs(r.c) * std::max(1.0, 1.0 / std::sqrt(2.0 * lambda)));
        return r;
    }
    // Constant sigma, h = 1, a single finite upper end: X = xi + sigma W hitting x2.
    if (!c.has("problem") || problem_class(c) != "transform") return std::nullopt;
    const auto p = transform_problem(c);
    const auto s = p.sigma().constant_value();
    const auto h = p.h().constant_value();
    if (!s || !h || *h != 1.0 || !p.x1().is_neg_inf() || !p.x2().is_finite()) return std::nullopt;
    r.c = *s;
    r.x_hi = p.x2().value();
    xi_out = p.xi();
    r.x_lo = xi_out - 12.0 * std::fabs(r.c) * std::max(1.0, 1.0 / std::sqrt(2.0 * lambda));
    return r;
}

DistCurve laplace_source(const Config& c, std::string& name) {
    if (c.has("cdf_csv")) {
        std::ifstream in(c.str("cdf_csv"));
        if (!in) throw ConfigError("cannot read cdf_csv " + c.str("cdf_csv"));
        std::ostringstream ss;
        ss << in.rdbuf();
        name = "csv";
        auto curve = blowup::dist_curve_from_csv(ss.str());
        curve.validate(1e-9);
        return curve;
    }
    name = c.str("method", "analytic");
    if (name == "all") throw ConfigError("laplace takes a single CDF source; method all is not supported");
    const double t_max = c.num("laplace_t_max", 100.0);
    const long long n = c.integer("laplace_n", 40000);
    std::vector<double> grid;
    for (long long k = 1; k <= n; ++k) grid.push_back(t_max * static_cast<double>(k) / static_cast<double>(n));
    return run_route(name, c, grid).curve;
}

}  // namespace

// ---------------------------------------------------------------------------

int cmd_verdict(const Context& ctx) {
    const Config& c = ctx.config;
    const std::string cls = problem_class(c);
    json j;
    bool decided = false;
    if (cls == "transform") {
        const auto p = transform_problem(c);
        const auto rep = blowup::transform_explosion_verdict(p, psi_hints(c), c.opt_num("clock_hint"));
        j = meta(ctx);
        j["problem"] = "transform";
        j["verdict"] = std::string(blowup::to_string(rep.verdict.kind));
        j["evidence"] = rep.verdict.evidence;
        if (rep.verdict.explosion_probability) j["explosion_probability"] = *rep.verdict.explosion_probability;
        j["psi_toward_x1"] = improper_json(rep.limits.toward_x1);
        j["psi_toward_x2"] = improper_json(rep.limits.toward_x2);
        j["clock"] = improper_json(rep.clock);
        if (rep.limits.barriers) {
            j["barriers"] = {ext_json(rep.limits.barriers->l), ext_json(rep.limits.barriers->r)};
            if (rep.verdict.kind == blowup::VerdictKind::ExplodesFiniteTime) {
                const auto curve = blowup::analytic_distribution(p, *rep.limits.barriers, {1.0});
                j["explosion_time_or_bracket"] = {{"distribution", curve.closed_form.value_or("")}};
            }
        }
        decided = rep.verdict.decided();
    } else if (cls == "osgood") {
        const auto p = osgood_problem(c);
        const bool assume = c.flag("assume_hypotheses", false);
        if (wiener_noise(c)) {
            const auto rep = blowup::sde_verdict(p, noise_spec(c), h4_options(c), assume);
            j = with_meta(ctx, rep.to_json());
            decided = rep.osgood.verdict.decided();
        } else {
            blowup::VerdictOptions vo;
            vo.assume_hypotheses = assume;
            const auto rep = blowup::osgood_verdict(p, vo);
            j = with_meta(ctx, rep.to_json());
            if (rep.explosion_time) j["explosion_time_or_bracket"] = {{"explosion_time", ext_json(*rep.explosion_time)}};
            else if (rep.bracket) j["explosion_time_or_bracket"] = {{"bracket", {rep.bracket->first, rep.bracket->second}}};
            decided = rep.verdict.decided();
        }
        j["problem"] = "osgood";
    } else {
        throw ConfigError("verdict needs problem = transform or osgood");
    }
    emit(ctx, "verdict.json", j);
    return decided ? 0 : 2;
}

int cmd_dist(const Context& ctx) {
    const Config& c = ctx.config;
    const auto times = time_grid(c);
    const double tol = c.num("tol", 5e-3);
    std::vector<Route> routes;
    for (const auto& m : methods_for(c)) {
        routes.push_back(run_route(m, c, times));
        write_file(ctx, "dist_" + m + ".csv", blowup::to_csv(routes.back().curve, csv_header(ctx, "dist " + m)));
    }
    // A known CDF in t, compared like any other route.
    if (c.has("reference_cdf")) {
        const auto f = c.expr("reference_cdf", "t");
        Route ref{"reference", {}};
        ref.curve.times = routes.front().curve.times;
        for (double t : ref.curve.times) ref.curve.cdf.push_back(t > 0.0 ? f(t) : 0.0);
        ref.curve.closed_form = "reference_cdf: " + f.to_string();
        ref.curve.total_mass = ref.curve.cdf.back();
        routes.push_back(ref);
    }
    json j = meta(ctx);
    json& curves = j["curves"];
    for (const auto& r : routes) curves[r.name] = json::parse(blowup::to_json(r.curve));
    j["sup_gaps"] = json::array();
    bool all_agree = true;
    for (std::size_t i = 0; i < routes.size(); ++i) {
        for (std::size_t k = i + 1; k < routes.size(); ++k) {
            const double gap = blowup::sup_gap(routes[i].curve, routes[k].curve);
            const double allowed = std::max(tol, 3.0 * std::max(max_se(routes[i].curve), max_se(routes[k].curve)));
            const bool agree = gap <= allowed;
            all_agree = all_agree && agree;
            j["sup_gaps"].push_back(
                {{"a", routes[i].name}, {"b", routes[k].name}, {"sup_gap", gap}, {"allowed", allowed}, {"agree", agree}});
        }
    }
    j["all_agree"] = all_agree;
    write_file(ctx, "dist_comparison.json", j.dump(2) + "\n");
    json summary = meta(ctx);
    summary["methods"] = json::array();
    for (const auto& r : routes) summary["methods"].push_back(r.name);
    summary["sup_gaps"] = j["sup_gaps"];
    summary["all_agree"] = all_agree;
    std::cout << summary.dump(2) << "\n";
    return 0;
}

int cmd_laplace(const Context& ctx) {
    const Config& c = ctx.config;
    const auto lambdas = c.list("lambda");
    for (double l : lambdas)
        if (!(l > 0.0)) throw ConfigError("lambda must be positive");
    std::string source;
    const DistCurve curve = laplace_source(c, source);
    const double tol = c.num("tol", 1e-3);
    json j = meta(ctx);
    j["cdf_source"] = source;
    j["results"] = json::array();
    std::optional<double> prev;
    bool decreasing = true;
    for (double l : lambdas) {
        json row;
        row["lambda"] = l;
        const double v = blowup::laplace_from_cdf(curve, l);
        row["from_cdf"] = v;
        double xi = 0.0;
        if (const auto r = resolvent_for(c, l, xi)) {
            const double w = blowup::solve_resolvent_ode(*r).at(xi);
            row["resolvent"] = w;
            row["gap"] = std::fabs(w - v);
            row["agree"] = std::fabs(w - v) <= tol;
        }
        if (prev && std::is_sorted(lambdas.begin(), lambdas.end()) && v > *prev + 1e-12) decreasing = false;
        prev = v;
        j["results"].push_back(row);
    }
    if (std::is_sorted(lambdas.begin(), lambdas.end())) j["decreasing_in_lambda"] = decreasing;
    emit(ctx, "laplace.json", j);
    return 0;
}

int cmd_simulate(const Context& ctx) {
    const Config& c = ctx.config;
    const std::string cls = problem_class(c);
    blowup::SamplePool pool;
    if (cls == "transform") {
        const auto p = transform_problem(c);
        pool = blowup::simulate_exit_transformed(p, barriers_or_throw(p, c), c.num("t_max"), exit_options(c));
    } else if (cls == "osgood") {
        pool = blowup::simulate_sde_euler(osgood_problem(c), noise_spec(c), euler_options(c, c.num("t_max")));
    } else {
        throw ConfigError("simulate needs problem = transform or osgood");
    }
    std::string csv;
    for (const auto& [k, v] : csv_header(ctx, "explosion samples")) csv += "# " + k + "=" + v + "\n";
    csv += pool.to_csv();
    write_file(ctx, "samples.csv", csv);
    json side = with_meta(ctx, pool.sidecar_json());
    write_file(ctx, "samples.json", side.dump(2) + "\n");
    std::cout << side.dump(2) << "\n";
    return 0;
}

int cmd_h4check(const Context& ctx) {
    const Config& c = ctx.config;
    const auto f = c.expr("f", "t");
    const auto opts = h4_options(c);
    blowup::H4Report rep;
    if (c.has("M") || c.has("p")) rep = blowup::check_H4(f, c.num("M", 1.0), c.num("p", 4.0), opts);
    else rep = blowup::scan_H4(f, opts);
    emit(ctx, "h4.json", with_meta(ctx, rep.to_json()));
    return rep.verdict == blowup::H4Status::Unknown ? 2 : 0;
}

int cmd_odetime(const Context& ctx) {
    const Config& c = ctx.config;
    auto p = osgood_problem(c);
    const double t0 = c.num("t0", 0.0);
    const double x0 = c.num("x0", p.xi);
    const auto et = blowup::ode_explosion_time(p, t0, x0);
    json j = meta(ctx);
    j["t0"] = t0;
    j["x0"] = x0;
    j["explosion_time"] = et.time ? ext_json(*et.time) : json();
    j["osgood_integral"] = improper_json(et.osgood_integral);
    j["clock_integral"] = improper_json(et.clock_integral);
    emit(ctx, "odetime.json", j);
    return et.time ? 0 : 2;
}

}  // namespace cli
