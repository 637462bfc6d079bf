#pragma once

#include "rbmlab/geometry.hpp"
#include "rbmlab/sde.hpp"

#include <span>
#include <vector>

namespace rbmlab {

/// Log-separation read at the local-time ladder: entry k holds
/// log |X - Y| at the k-th ladder time, where each ladder segment stops once
/// either component has gained b units of local time since the segment start.
struct LogSeparationLadder {
    double b = 0.0;
    std::vector<double> log_sep;      // entry 0 is the initial separation
    std::vector<double> ladder_times; // clock at each entry (entry 0 at t = 0)
    std::vector<double> local_x;
    std::vector<double> local_y;
    std::vector<double> overshoot;    // local-time overshoot past each rung
    bool budget_exhausted = false;
};

LogSeparationLadder log_separation_ladder(const TorusPoint& x0, const TorusPoint& y0,
                                          double b, std::size_t rungs,
                                          NormalSource& noise, const DomainGeometry& geom,
                                          const StepPolicy& policy);

/// |<y - x, n(x)>| / |y - x| with the minimal-image difference; 0 for purely
/// tangential displacements, 1 for purely normal ones.
double alignment_ratio(const TorusPoint& x, const TorusPoint& y,
                       const DomainGeometry& geom);

struct BigExcursion {
    Vec3 endpoint;    // on the sphere
    double delta_ell; // local time from this excursion's start to the next one's
};

/// Entry 0 is the first boundary contact; subsequent entries are the
/// endpoints of excursions whose start-to-end displacement is >= eps_star.
/// The delta_ell values partition the total local time of the window.
struct BigExcursionChain {
    double eps_star = 0.0;
    std::vector<BigExcursion> entries;
    double total_local_time = 0.0;
};

BigExcursionChain extract_big_excursions(std::span<const Contact> contacts,
                                         double total_local_time, double eps_star,
                                         const DomainGeometry& geom);

/// exp(L) * (projection at the last chain point) o ... o (projection at the
/// first).  The shape operator is the identity on the unit sphere, so the
/// whole derivative flow factorizes this way.
Vec3 derivative_map(const BigExcursionChain& chain, double total_local_time,
                    const Vec3& v0);

struct FlowDerivativeCheck {
    Vec3 finite_diff;
    Vec3 product;
    double rel_err = 0.0;
    double eps = 0.0;
    double eps_star = 0.0;
    double local_time = 0.0;
    std::uint64_t steps = 0;
};

/// Runs X from x and from x + eps*v with identical noise until X has gained
/// b units of local time, then compares the finite-difference derivative
/// against the excursion-product map extracted from X's contact log.
/// eps_star = c4 * eps.
FlowDerivativeCheck check_flow_derivative(const TorusPoint& x, const Vec3& v, double eps,
                                          double b, NormalSource& noise,
                                          const DomainGeometry& geom,
                                          const StepPolicy& policy, double c4 = 1.0);

} // namespace rbmlab
