#pragma once

#include "rbmlab/excursion.hpp"
#include "rbmlab/quadrature.hpp"

#include <cstdint>

namespace rbmlab {

/// The analytic constants of the exterior-domain excursion functional.
///   I1 = sqrt(2) - 1 - log(1 + sqrt(2))        (tangent-contraction mean
///        under the excursion endpoint law 2|x-y|^-3)
///   I2 = log(2) - 1                            (same observable averaged
///        against the uniform endpoint measure)
///   lambda_limit = I1 + I2 = sqrt(2) + log(2) - 2 - log(1 + sqrt(2))
struct ClosedForms {
    double I1_exact;
    double I2_exact;
    double lambda_limit;
    double H_hat_f; // equals I1_exact
};

ClosedForms closed_forms();

/// 2-D quadrature of the tangent-contraction integrand against the endpoint
/// density, in angle coordinates.  alt_route integrates the same quantity
/// after the substitution u = cos(alpha) (independent parametrization used
/// as a cross-check).  Converges to I1_exact.
QuadratureResult integral_I1(double tol, bool alt_route = false);

/// Same observable against the uniform endpoint measure; converges to
/// I2_exact = log(2) - 1.
QuadratureResult integral_I2(double tol, bool alt_route = false);

struct LyapunovEstimate {
    double lambda = 0.0;
    double lambda_star = 0.0; // 1 + lambda, exactly
    double stderr = 0.0;      // 0 for analytic values
    double rho = 0.0;         // +inf for the exterior domain
    std::uint64_t n_hit = 0;
    std::uint64_t n_escape = 0;
};

struct McParams {
    double delta = 1e-3;
    double dt = 0.0; // 0: derive from delta as (delta/30)^2
    std::uint64_t n_runs = 1000000;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    double far_radius = 64.0;
};

/// Monte Carlo estimate of lambda_rho = H^x(f_v) at finite rho, or of the
/// exterior-domain value at rho = +inf.  lambda_star = 1 + lambda.
LyapunovEstimate estimate_lambda(double rho_or_inf, const McParams& params);

} // namespace rbmlab
