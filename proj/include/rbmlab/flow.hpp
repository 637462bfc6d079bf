#pragma once

#include "rbmlab/geometry.hpp"
#include "rbmlab/rng.hpp"
#include "rbmlab/sde.hpp"

#include <span>
#include <vector>

namespace rbmlab {

/// Many reflected Brownian motions sharing one driver.  SoA layout so the
/// per-step update runs through the data-parallel kernel.
struct ParticleEnsemble {
    std::vector<double> xs, ys, zs, ls;
    std::vector<Vec3> origin;
    std::size_t size() const { return xs.size(); }
};

/// Cell-centered n^3 lattice over the torus cell, points inside the unit
/// ball dropped.
ParticleEnsemble init_lattice(int n_per_axis, const DomainGeometry& geom);

struct Snapshot {
    double t = 0.0;
    Vec3 driver; // cumulative Brownian increment at this time
    std::vector<double> xs, ys, zs, ls;
};

/// Advance all particles with the shared increment sequence at the fixed
/// policy.dt (far-field scaling does not apply: the increment is common to
/// particles at every distance).  Snapshots are deep copies taken at the
/// first step boundary reaching each requested time.
std::vector<Snapshot> evolve_ensemble(ParticleEnsemble& ens, NormalSource& noise,
                                      std::span<const double> snapshot_times,
                                      const DomainGeometry& geom,
                                      const StepPolicy& policy);

/// Binned occupation measure on the torus cell with ball-overlap volume
/// corrections (5^3 subsampling per straddling bin).
struct EmpiricalMeasure {
    int n_bins = 0;
    double rho = 0.0;
    std::vector<double> counts;           // n_bins^3, x-major
    std::vector<double> corrected_volume; // same layout
    double total = 0.0;
};

EmpiricalMeasure empirical_measure(const Snapshot& snap, int n_bins,
                                   const DomainGeometry& geom);

struct UniformityMetrics {
    double chi_square = 0.0;
    double dof = 0.0;
    double tv_distance = 0.0;
};

/// Both metrics against the uniform measure on the corrected bin volumes.
UniformityMetrics uniformity_metric(const EmpiricalMeasure& m);

/// Positions in the frame of the moving obstacle: canonicalize(x - B_t).
std::vector<Vec3> earthworm_frame(const Snapshot& snap, const Vec3& cumulative_driver,
                                  const DomainGeometry& geom);

struct PairDistanceHistogram {
    std::vector<double> edges; // n_bins+1 edges over [0, rho*sqrt(3)]
    std::vector<double> mass;  // time-occupation fractions over [T/2, T]
    double mass_below_threshold = 0.0;
    double threshold = 0.0;
    double burn_in = 0.0;
    double horizon = 0.0;
};

/// Occupation histogram of the pair distance over [T/2, T] (first half
/// discarded as burn-in), with the sub-threshold mass reported separately.
PairDistanceHistogram pair_distance_histogram(const TorusPoint& x0, const TorusPoint& y0,
                                              double horizon, NormalSource& noise,
                                              const DomainGeometry& geom,
                                              const StepPolicy& policy, int n_bins,
                                              double threshold = 1e-3);

} // namespace rbmlab
