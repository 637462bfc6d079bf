#include "rbmlab/exponent.hpp"

#include <cmath>

namespace rbmlab {

namespace {

// Angle-route integrand of I1 on the symmetry-reduced domain
// (alpha, beta) in [0, pi] x [0, pi/2]; the 4-fold beta symmetry is folded
// into the coefficient.  Continuously extended by its small-alpha series:
// the density blow-up sin(a/2)^-3 is exactly cancelled by f ~ -alpha^2.
double i1_integrand_angle(double alpha, double beta) {
    const double sb = std::sin(beta);
    const double sb2 = sb * sb;
    if (alpha < 1e-3) {
        const double a2 = alpha * alpha;
        return -sb2 / M_PI +
               (2.0 * a2 / M_PI) * ((3.0 / 16.0) * sb2 - 0.25 * sb2 * sb2);
    }
    const double sa = std::sin(alpha);
    const double sh = std::sin(0.5 * alpha);
    const double t = sb * sa;
    const double fv = 0.5 * std::log1p(-t * t);
    if (!std::isfinite(fv)) return 0.0; // single log-singular point, measure zero
    return (1.0 / (4.0 * M_PI)) * sa / (sh * sh * sh) * fv;
}

// w-route integrand of I1: u = cos(alpha), w = sqrt(1 - u), domain
// (w, beta) in [0, sqrt(2)] x [0, pi/2], coefficient 1/(sqrt(2) pi).
double i1_integrand_w(double w, double beta) {
    const double sb = std::sin(beta);
    const double cb = std::cos(beta);
    const double sb2 = sb * sb;
    if (w < 1e-4) {
        const double w2 = w * w;
        return (-2.0 * sb2 + w2 * (sb2 - 2.0 * sb2 * sb2)) / (std::sqrt(2.0) * M_PI);
    }
    const double u = 1.0 - w * w;
    const double arg = cb * cb + u * u * sb2;
    const double lv = std::log(arg);
    if (!std::isfinite(lv)) return 0.0;
    return lv / (w * w) / (std::sqrt(2.0) * M_PI);
}

// Angle-route integrand of I2 on the reduced domain, coefficient 1/pi.
double i2_integrand_angle(double alpha, double beta) {
    const double sb = std::sin(beta);
    const double sa = std::sin(alpha);
    const double t = sb * sa;
    const double fv = 0.5 * std::log1p(-t * t);
    if (!std::isfinite(fv)) return 0.0;
    return sa * fv / M_PI;
}

// u-route integrand of I2: u in [-1, 1], coefficient 1/(2 pi).
double i2_integrand_u(double u, double beta) {
    const double sb = std::sin(beta);
    const double cb = std::cos(beta);
    const double lv = std::log(cb * cb + u * u * sb * sb);
    if (!std::isfinite(lv)) return 0.0;
    return lv / (2.0 * M_PI);
}

} // namespace

ClosedForms closed_forms() {
    const double s2 = std::sqrt(2.0);
    const double l12 = std::log1p(s2); // log(1 + sqrt(2))
    ClosedForms c;
    c.I1_exact = s2 - 1.0 - l12;
    c.I2_exact = std::log(2.0) - 1.0;
    c.lambda_limit = s2 + std::log(2.0) - 2.0 - l12;
    c.H_hat_f = c.I1_exact;
    return c;
}

QuadratureResult integral_I1(double tol, bool alt_route) {
    if (!(tol >= 1e-12)) throw std::invalid_argument("integral_I1: tol must be >= 1e-12");
    if (alt_route)
        return integrate_2d(i1_integrand_w, 0.0, std::sqrt(2.0), 0.0, 0.5 * M_PI, tol);
    return integrate_2d(i1_integrand_angle, 0.0, M_PI, 0.0, 0.5 * M_PI, tol);
}

QuadratureResult integral_I2(double tol, bool alt_route) {
    if (!(tol >= 1e-12)) throw std::invalid_argument("integral_I2: tol must be >= 1e-12");
    if (alt_route)
        return integrate_2d(i2_integrand_u, -1.0, 1.0, 0.0, 0.5 * M_PI, tol);
    return integrate_2d(i2_integrand_angle, 0.0, M_PI, 0.0, 0.5 * M_PI, tol);
}

LyapunovEstimate estimate_lambda(double rho_or_inf, const McParams& params) {
    if (params.n_runs == 0) throw std::invalid_argument("estimate_lambda: N must be >= 1");
    const bool exterior = std::isinf(rho_or_inf);
    const DomainGeometry geom =
        exterior ? DomainGeometry::exterior() : DomainGeometry::torus(rho_or_inf);
    const double dt =
        params.dt > 0.0 ? params.dt : (params.delta / 30.0) * (params.delta / 30.0);

    const TorusPoint x{Vec3{1.0, 0.0, 0.0}};
    const Vec3 v{0.0, 0.0, 1.0};
    const HfEstimate est =
        estimate_Hf_mc(x, v, params.delta, dt, params.n_runs, params.far_radius, geom,
                       params.seed, params.threads);

    LyapunovEstimate out;
    out.lambda = est.mean;
    out.lambda_star = 1.0 + est.mean;
    out.stderr = est.stderr;
    out.rho = rho_or_inf;
    out.n_hit = est.n_hit;
    out.n_escape = est.n_escape;
    return out;
}

} // namespace rbmlab
