#pragma once

#include <cmath>
#include <cstddef>
#include <queue>
#include <stdexcept>
#include <vector>

namespace rbmlab {

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    long evaluations = 0;
    bool converged = false;
};

namespace detail {

// Gauss-7 / Kronrod-15 pair. Nodes are strictly interior, so integrands with
// integrable endpoint singularities are never evaluated at the endpoints.
inline constexpr double kGkNode[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.000000000000000};
inline constexpr double kGkWk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
inline constexpr double kGkWg[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

template <class F>
inline void gk15(const F& f, double a, double b, double& value, double& error) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double k = kGkWk[7] * fc;
    double g = kGkWg[3] * fc;
    for (int i = 0; i < 7; ++i) {
        const double dx = h * kGkNode[i];
        const double fs = f(c + dx) + f(c - dx);
        k += kGkWk[i] * fs;
        if (i % 2 == 1) g += kGkWg[i / 2] * fs;
    }
    value = k * h;
    const double e = std::abs((k - g) * h);
    error = std::min(e, std::pow(200.0 * e, 1.5));
}

struct Panel {
    double a, b, value, error;
    int depth;
    bool operator<(const Panel& o) const { return error < o.error; }
};

} // namespace detail

/// Globally adaptive 1-D quadrature: repeatedly bisect the panel with the
/// largest error estimate.  Subdivision depth is capped; leftover error stays
/// in error_estimate.
template <class F>
QuadratureResult adaptive_gk(const F& f, double a, double b, double abs_tol,
                             long max_evals = 10000000, int max_depth = 50) {
    QuadratureResult res;
    std::priority_queue<detail::Panel> heap;
    detail::Panel p{a, b, 0.0, 0.0, 0};
    detail::gk15(f, a, b, p.value, p.error);
    res.evaluations = 15;
    double total_value = p.value;
    double total_error = p.error;
    heap.push(p);

    while (total_error > abs_tol && res.evaluations + 30 <= max_evals) {
        const detail::Panel top = heap.top();
        if (top.depth >= max_depth) break;
        heap.pop();
        total_value -= top.value;
        total_error -= top.error;
        const double mid = 0.5 * (top.a + top.b);
        for (int half = 0; half < 2; ++half) {
            detail::Panel q{half ? mid : top.a, half ? top.b : mid, 0.0, 0.0,
                            top.depth + 1};
            detail::gk15(f, q.a, q.b, q.value, q.error);
            total_value += q.value;
            total_error += q.error;
            heap.push(q);
        }
        res.evaluations += 30;
    }
    res.value = total_value;
    res.error_estimate = total_error;
    res.converged = total_error <= abs_tol;
    return res;
}

/// Nested adaptive 2-D quadrature of f(x, y) over [ax,bx] x [ay,by].
/// The inner (x) integrals are resolved to a tolerance that keeps their
/// accumulated contribution below half of the total budget.
template <class F2>
QuadratureResult integrate_2d(const F2& f, double ax, double bx, double ay, double by,
                              double abs_tol, long max_evals = 10000000) {
    if (!(abs_tol > 0.0)) throw std::invalid_argument("integrate_2d: tol must be > 0");
    const double inner_tol = 0.5 * abs_tol / (by - ay);
    long evals = 0;
    double inner_error_rate = 0.0; // max observed inner error per unit y

    auto inner = [&](double y) {
        auto fx = [&, y](double x) { return f(x, y); };
        QuadratureResult r = adaptive_gk(fx, ax, bx, inner_tol, max_evals);
        evals += r.evaluations;
        if (r.error_estimate > inner_error_rate) inner_error_rate = r.error_estimate;
        return r.value;
    };
    QuadratureResult outer = adaptive_gk(inner, ay, by, 0.5 * abs_tol, max_evals);
    outer.evaluations = evals;
    outer.error_estimate += inner_error_rate * (by - ay);
    outer.converged = outer.error_estimate <= abs_tol && evals <= max_evals;
    return outer;
}

} // namespace rbmlab
