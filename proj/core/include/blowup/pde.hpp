#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "blowup/dist_curve.hpp"
#include "blowup/expr.hpp"

namespace blowup {

/// Which truncated end carries the value 1: both, only the right, or only the left.
enum class BoundaryCase { Both1, RightOnly, LeftOnly };
std::string_view to_string(BoundaryCase c);
BoundaryCase parse_boundary_case(std::string_view text);

enum class Spacing { Uniform, Geometric };

/// u_t = (1/2) sigma^2(x) u_xx + b(x) u_x on [x_lo, x_hi] x (0, t_final], u(0, x) = 0.
struct PdeProblem {
    FunctionExpr b = FunctionExpr::constant(0.0);
    FunctionExpr sigma = FunctionExpr::constant(1.0);
    BoundaryCase bc = BoundaryCase::Both1;
    double x_lo = -1.0;
    double x_hi = 1.0;
    double t_final = 1.0;
    int nx = 400;
    int nt = 400;
    /// Geometric spacing needs 0 < x_lo and packs nodes toward x_lo.
    Spacing spacing = Spacing::Uniform;
    double theta = 0.5;
    /// Leading time steps replaced by two backward-Euler half steps each, to damp the
    /// boundary-data jump at t = 0.
    int startup_steps = 2;

    /// Throws std::invalid_argument on an empty domain, nx or nt below 16, theta outside
    /// [1/2, 1], or geometric spacing with x_lo <= 0.
    void validate() const;
};

/// n + 1 nodes from lo to hi; geometric spacing keeps the ratio of successive steps fixed.
std::vector<double> make_space_grid(double lo, double hi, int n, Spacing spacing);

struct PdeSolution {
    std::vector<double> t;
    std::vector<double> x;
    /// u[k][i] = u(t[k], x[i]).
    std::vector<std::vector<double>> u;
    BoundaryCase bc = BoundaryCase::Both1;
    double theta = 0.5;
    int startup_steps = 0;
    /// Cells whose Peclet number |b| h / (sigma^2 / 2) exceeded 2 and got one-sided differences.
    int upwinded_cells = 0;
    double max_peclet = 0.0;
    double u_min = 0.0;
    double u_max = 0.0;

    /// u(t[k], x) by linear interpolation in x.
    double at(std::size_t k, double x) const;
    /// Rows `t,x,u` for every grid point, 17 significant digits.
    std::string to_csv() const;
    /// Scheme, grid sizes and extents, Peclet statistics, and the range of u.
    std::string metadata_json() const;
};

/// Theta scheme (Crank-Nicolson by default) with three-point differences on the (possibly
/// non-uniform) grid and a backward-Euler startup. Throws NumericalError if u leaves
/// [-1e-6, 1 + 1e-6]; the message carries the step sizes and the Peclet statistics.
PdeSolution solve_forward(const PdeProblem& p);

/// P(explosion time <= t[k]) = u(t[k], xi) for every time level.
DistCurve extract_cdf(const PdeSolution& s, double xi);

/// (c^2/2) w'' + (g(x) + a - bshift) w' - lambda w = 0 on [x_lo, x_hi], w(x_hi) = 1.
struct ResolventProblem {
    FunctionExpr g = FunctionExpr::constant(0.0);
    double a = 0.0;
    double bshift = 0.0;
    double c = 1.0;
    double lambda = 1.0;
    double x_lo = -10.0;
    double x_hi = 0.0;
    int nx = 4000;

    /// Throws std::invalid_argument unless c != 0, lambda > 0, a >= bshift, x_lo < x_hi and nx >= 16.
    void validate() const;
};

struct ResolventSolution {
    std::vector<double> x;
    std::vector<double> w;
    double h = 0.0;
    int upwinded_cells = 0;

    double at(double x) const;
};

/// Central differences on a uniform grid with a Thomas solve. The left end uses the decaying
/// exponential mode of the frozen-coefficient equation, w' = k w with
/// k = (-D + sqrt(D^2 + 2 c^2 lambda)) / c^2, discretised one-sidedly to second order.
/// Throws NumericalError on a singular system or when w leaves [0, 1].
ResolventSolution solve_resolvent_ode(const ResolventProblem& p);

/// u(t, x) = w(x - bshift t), linearly interpolated.
double traveling_wave_check(const ResolventSolution& w, double bshift, double t, double x);

/// Largest |-u_t - (c^2/2) u_xx - (g(x - bshift t) + a) u_x + lambda u| for u = w(x - bshift t).
/// Derivatives are central differences of width m = `stencil` grid steps in x and
/// dt = m h / |bshift| in t (dt = m h when bshift = 0), taken at (j dt, x_i + bshift j dt)
/// for j = 1..time_steps, so every stencil point is a grid node of w. With m > 1 this is
/// an independent consistency check of the discrete w, not a replay of its own equations.
double traveling_wave_residual(const ResolventSolution& w, const ResolventProblem& p, int time_steps, int stencil = 4);

/// lambda * integral_0^inf CDF(u) e^{-lambda u} du, with the curve linear between grid points
/// (integrated exactly against the exponential), constant at its first value before the grid
/// and at its last value after it.
double laplace_from_cdf(const DistCurve& curve, double lambda);

}  // namespace blowup
