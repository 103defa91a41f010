#include "blowup/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

#include "blowup/errors.hpp"

namespace blowup {

namespace {

// Gauss-Kronrod 7-15 abscissae and weights (QUADPACK qk15).
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double a, b, value, error;
    bool operator<(const Segment& o) const { return error < o.error; }
};

struct Rule {
    double value, error;
    bool infinite;
};

Rule gk15(const RealFunction& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(center);
    double resg = fc * kWg[3];
    double resk = fc * kWgk[7];
    double resabs = std::fabs(resk);
    std::array<double, 7> fv1{}, fv2{};
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kXgk[j];
        const double f1 = f(center - dx);
        const double f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        resk += kWgk[j] * (f1 + f2);
        resabs += kWgk[j] * (std::fabs(f1) + std::fabs(f2));
        if (j % 2 == 1) resg += kWg[j / 2] * (f1 + f2);
    }
    if (std::isinf(resk) || std::isinf(resabs)) return {resk * half, 0.0, true};
    const double reskh = resk * 0.5;
    double resasc = kWgk[7] * std::fabs(fc - reskh);
    for (int j = 0; j < 7; ++j) resasc += kWgk[j] * (std::fabs(fv1[j] - reskh) + std::fabs(fv2[j] - reskh));
    resk *= half;
    resg *= half;
    resasc *= std::fabs(half);
    resabs *= std::fabs(half);
    double err = std::fabs(resk - resg);
    if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    constexpr double eps = std::numeric_limits<double>::epsilon();
    if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) err = std::max(50.0 * eps * resabs, err);
    return {resk, err, false};
}

}  // namespace

QuadratureResult integrate(const RealFunction& f, double a, double b, const QuadratureOptions& opts) {
    if (std::isnan(a) || std::isnan(b)) throw NumericalError("integrate: NaN limit");
    if (a == b) return {};
    if (b < a) {
        QuadratureResult r = integrate(f, b, a, opts);
        r.value = -r.value;
        return r;
    }
    if (!std::isfinite(a) || !std::isfinite(b)) throw NumericalError("integrate: limits must be finite");

    QuadratureResult out;
    const Rule first = gk15(f, a, b);
    out.evaluations = 15;
    out.intervals = 1;
    if (first.infinite) {
        out.value = first.value;
        out.error = 0.0;
        return out;
    }

    std::priority_queue<Segment> heap;
    heap.push({a, b, first.value, first.error});
    double total = first.value;
    double total_err = first.error;

    while (total_err > std::max(opts.abs_tol, opts.rel_tol * std::fabs(total))) {
        if (out.intervals >= opts.max_intervals) {
            throw NumericalError("integrate: no convergence on [" + std::to_string(a) + ", " +
                                 std::to_string(b) + "] (error estimate " + std::to_string(total_err) +
                                 "); integrand may be non-integrable");
        }
        const Segment worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            throw NumericalError("integrate: interval collapsed near " + std::to_string(mid) +
                                 "; integrand may be non-integrable");
        }
        const Rule left = gk15(f, worst.a, mid);
        const Rule right = gk15(f, mid, worst.b);
        out.evaluations += 30;
        if (left.infinite || right.infinite) {
            out.value = left.infinite ? left.value : right.value;
            out.error = 0.0;
            return out;
        }
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push({worst.a, mid, left.value, left.error});
        heap.push({mid, worst.b, right.value, right.error});
        ++out.intervals;
    }

    // Re-sum to shed accumulated cancellation in the running totals.
    double sum = 0.0, err = 0.0;
    while (!heap.empty()) {
        sum += heap.top().value;
        err += heap.top().error;
        heap.pop();
    }
    out.value = sum;
    out.error = err;
    return out;
}

QuadratureResult integrate_to_infinity(const RealFunction& f, double a, const QuadratureOptions& opts) {
    auto mapped = [&](double s) {
        const double x = a + (1.0 - s) / s;
        const double fx = f(x);
        if (fx == 0.0) return 0.0;
        return fx / (s * s);
    };
    return integrate(mapped, 0.0, 1.0, opts);
}

}  // namespace blowup
