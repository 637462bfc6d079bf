#pragma once

#include "rbmlab/geometry.hpp"
#include "rbmlab/rng.hpp"
#include "rbmlab/sde.hpp"

#include <cstdint>
#include <limits>
#include <optional>

namespace rbmlab {

/// Spherical coordinates of an excursion endpoint relative to its start:
/// alpha is the angle at the origin between the radii to start and endpoint,
/// beta the azimuth of the endpoint around the start's radius.  beta is
/// measured so that beta = 0 puts the endpoint in the plane through the
/// origin orthogonal to the reference tangent vector (where the projection
/// loses nothing); the densities below are beta-uniform either way.
struct AngleCoords {
    double alpha = 0.0; // (0, pi]
    double beta = 0.0;  // [0, 2*pi)
};

/// Endpoint density 2|x-y|^-3 of the exterior-domain excursion law relative
/// to the uniform probability measure on the unit sphere.
double endpoint_density(const Vec3& x_unit, const Vec3& y_unit);

/// The same density in angle coordinates: (1/16pi) sin(a) sin(a/2)^-3 per
/// d(alpha) d(beta).
double angle_density(const AngleCoords& a);

/// Log-contraction of a unit tangent vector under projection to the tangent
/// plane at the endpoint: (1/2) log(cos^2 b + sin^2 b cos^2 a) <= 0.
/// Exactly -infinity where the argument vanishes (alpha = beta = pi/2 mod
/// the symmetries); that is a sentinel value, not an error.
double f_value(const AngleCoords& a);

/// log |pi_y(v)| for unit v; -infinity when v is parallel to y.
double f_of_projection(const Vec3& y_unit, const Vec3& v_unit);

/// Mass of endpoints at chord distance >= eps from the start: 1/eps - 1/2.
double truncated_mass(double eps_cut);

/// Normalized CDF of alpha under the law restricted to chord >= eps_cut.
double truncated_alpha_cdf(double alpha, double eps_cut);

/// Draw (alpha, beta) from the eps-truncated endpoint law: beta uniform,
/// alpha by monotone bisection of the closed-form CDF to 1e-12.
AngleCoords sample_truncated_endpoint(double eps_cut, UniformSource& rng);

struct ExcursionSample {
    Vec3 start;
    std::optional<Vec3> endpoint; // empty = escaped
    double f = 0.0;
    double delta = 0.0;
};

struct HfEstimate {
    double mean = 0.0;   // estimate of H^x(f_v), i.e. mean(f)/delta
    double stderr = 0.0; // standard error of the mean, same scaling
    std::uint64_t n_hit = 0;
    std::uint64_t n_escape = 0;
    double delta = 0.0;
    double dt = 0.0;
    std::uint64_t n_runs = 0;
};

/// Monte Carlo estimator of the excursion-law functional H^x(f_v) as the
/// (1/delta)-scaled mean of f over runs launched from x + delta*n(x).
/// Escaped runs (exterior mode only) contribute f = 0; in torus mode every
/// run ends in a hit.  Reduction order is fixed, so the result is
/// bit-identical at any thread count.
HfEstimate estimate_Hf_mc(const TorusPoint& x, const Vec3& v, double delta, double dt,
                          std::uint64_t n_runs, double far_radius,
                          const DomainGeometry& geom, std::uint64_t seed,
                          unsigned threads);

struct HarmonicValidation {
    double ks_truncated = 0.0;      // vs exact finite-delta hit-angle CDF, chord >= cutoff
    double ks_limit_law = 0.0;      // vs the delta->0 law 2|x-y|^-3 on the same region
    double ks_critical_1pct = 0.0;  // 1.628/sqrt(n_kept)
    std::uint64_t n_hit = 0;
    std::uint64_t n_escape = 0;
    std::uint64_t n_kept = 0; // hits with chord >= cutoff
    double cutoff = 0.0;
    bool pass_1pct = false;
};

/// Simulate first_hit_or_escape endpoints and KS-test the hit-angle
/// distribution against the analytic harmonic-measure law.
HarmonicValidation validate_harmonic(double delta, double dt, std::uint64_t n_runs,
                                     double far_radius, double cutoff,
                                     std::uint64_t seed, unsigned threads);

/// Exact hit-angle CDF (conditioned on hitting) for a walk started at radius
/// 1 + delta in the exterior domain; delta = 0 gives the truncated limit law.
double hit_angle_cdf(double alpha, double delta, double cutoff_alpha);

} // namespace rbmlab
