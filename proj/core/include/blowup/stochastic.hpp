#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "blowup/analytic.hpp"
#include "blowup/dist_curve.hpp"
#include "blowup/expr.hpp"
#include "blowup/improper.hpp"
#include "blowup/osgood.hpp"

namespace blowup {

/// The Wiener integral I_t = integral_0^t f(s) dW_s.
struct NoiseSpec {
    FunctionExpr f = FunctionExpr::constant(0.0, "t");
};

struct ExplosionSample {
    /// Explosion time, or t_max exactly when censored.
    double time = 0.0;
    bool censored = false;
};

struct SamplePool {
    std::vector<ExplosionSample> samples;
    std::uint64_t seed = 0;
    /// "brownian-exit", "brownian-exit-nobridge", "transformed-exit", "transformed-exit-nobridge" or "euler".
    std::string scheme;
    double t_max = 0.0;
    /// Euler only: the level above which a path counts as exploded.
    std::optional<double> threshold;
    std::string step_policy;

    std::size_t exploded() const noexcept;
    /// Columns `time,censored`, 17 significant digits.
    std::string to_csv() const;
    /// {seed, scheme, t_max, threshold, step_policy, n_paths, exploded}.
    std::string sidecar_json() const;
};

/// sqrt(2 F log log(max(e^e, F))) with F = integral_0^t f^2; +inf once F overflows.
double upsilon(const FunctionExpr& f, double t);

enum class H4Status { Holds, Fails, Unknown };
std::string_view to_string(H4Status s);

struct H4Report {
    double M = 1.0;
    double p = 4.0;
    /// Divergence of integral_0^inf f^2.
    ImproperVerdict integral_infinite;
    /// terms[k] belongs to n = M + k.
    std::vector<double> series_terms;
    std::vector<double> partial_sums;
    ImproperKind series = ImproperKind::Unknown;
    /// "ratio" when the decreasing-ratio sufficient condition settled it, "series" otherwise.
    std::string route;
    H4Status verdict = H4Status::Unknown;
    std::vector<std::string> evidence;

    std::string to_json() const;
};

struct H4Options {
    int n_max = 10000;
    /// Margin around slope -1 for the log-log fit of the series terms.
    double convergent_margin = 0.1;
    double divergent_margin = 0.05;
};

/// Sum over n >= M of (integral_n^{n+2} f^2)^{p/2} / upsilon(n)^p, together with the
/// divergence of integral f^2. Tries the fast path first: the ratio
/// (integral_t^{t+2} f^2) / (integral_0^t f^2) decreasing on [M, inf) with its p/2-th power
/// integrable bounds every term.
H4Report check_H4(const FunctionExpr& f, double M = 1.0, double p = 4.0, const H4Options& opts = {});
/// Scans (M, p) over {1, 2, 4, 8} x {1, 2, 4} and returns the first report that Holds, or
/// the last one tried (Fails only when every pair fails).
H4Report scan_H4(const FunctionExpr& f, const H4Options& opts = {});

struct SdeReport {
    OsgoodReport osgood;
    /// Absent when the noise is identically zero.
    std::optional<H4Report> h4;

    /// The Osgood report with an "h4" member added.
    std::string to_json() const;
};

/// Verdict for X_t = xi + integral a b(X) ds + integral f dW. When f is not identically zero,
/// H3 is replaced by the H4 lattice scan, which gives it almost surely; with f = 0 the
/// deterministic equation is decided exactly.
SdeReport sde_verdict(const OsgoodProblem& p, const NoiseSpec& noise, const H4Options& opts = {},
                      bool assume_hypotheses = false);

/// I on the grid (which must start at 0 and increase), increments drawn exactly from
/// N(0, integral of f^2 over the cell). Deterministic in (seed, index).
std::vector<double> sample_wiener_path(const FunctionExpr& f, const std::vector<double>& grid, std::uint64_t seed,
                                       std::uint64_t index = 0);

struct ExitOptions {
    std::size_t n_paths = 10000;
    std::uint64_t seed = 0;
    /// Step of the Brownian clock; 0 picks 1e-4 * clock horizon.
    double clock_step = 0.0;
    bool bridge = true;
    unsigned workers = 0;
};

/// First exit of standard Brownian motion from (l, r) before `clock_horizon`, with per-step
/// Brownian-bridge crossing checks at each finite barrier. Exits are recorded at the end of the
/// step in which they are detected; times are Brownian clock times.
SamplePool simulate_brownian_exit(const BarrierPair& barriers, double clock_horizon, const ExitOptions& opts);

/// Explosion times of the transformed equation: the Brownian exit clock mapped back through H^{-1},
/// censored at t_max. Throws DomainError when both barriers are infinite.
SamplePool simulate_exit_transformed(const TransformProblem& p, const BarrierPair& barriers, double t_max,
                                     const ExitOptions& opts);

struct EulerOptions {
    std::size_t n_paths = 1000;
    std::uint64_t seed = 0;
    double t_max = 10.0;
    double threshold = 1e8;
    /// One Gaussian increment of I per base cell.
    double base_step = 1e-4;
    /// Floor of the adaptive drift step; reaching it counts as explosion.
    double min_step = 1e-12;
    /// Multiplies the drift; used to build ordered pairs that share noise.
    double drift_scale = 1.0;
    unsigned workers = 0;
};

struct EulerPath {
    /// Values at the ends of the base cells up to explosion or t_max.
    std::vector<double> times;
    std::vector<double> values;
    std::optional<double> explosion_time;
};

/// Euler-Maruyama for X_t = xi + integral a b(X) ds + I_t. Drift substeps are halved until
/// a b(X) dt <= 0.1 (1 + |X|); the noise increment of each base cell is spread linearly over
/// its substeps. Declared explosion times are biased upward and depend on the threshold.
SamplePool simulate_sde_euler(const OsgoodProblem& p, const NoiseSpec& noise, const EulerOptions& opts);
/// The single path with index `index` of the pool above, recorded on the base grid.
EulerPath euler_path(const OsgoodProblem& p, const NoiseSpec& noise, const EulerOptions& opts, std::size_t index);

/// Right-continuous step CDF of the uncensored samples on `grid`, with binomial standard
/// errors. A sample counts at t when it is <= t (1 + 1e-12), so step-end times that land on
/// grid points up to rounding are not pushed to the next point.
DistCurve empirical_cdf(const SamplePool& pool, const std::vector<double>& grid);

/// Fraction of `n_paths` Wiener paths on [0, horizon] with xi + min I > r.
double frequency_above(const FunctionExpr& f, double xi, double r, double horizon, double step, std::size_t n_paths,
                       std::uint64_t seed);

}  // namespace blowup
