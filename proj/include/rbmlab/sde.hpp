#pragma once

#include "rbmlab/geometry.hpp"
#include "rbmlab/rng.hpp"

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace rbmlab {

struct BudgetExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DegenerateStep : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One reflected Brownian motion: position in the canonical cell (exterior
/// mode: raw coordinates), accumulated boundary local time, wall-clock time.
struct RbmState {
    Vec3 position;
    double local_time = 0.0;
    double clock = 0.0;
};

enum class StopKind {
    FixedTime,        // clock >= T
    LocalTimeX,       // L^X gained since run start >= b
    LocalTimeEither,  // max of the two gained local times >= b (pairs only)
    HitSphere,        // the reflection branch fired (or the free walk landed inside)
    EscapeRadius,     // |position| >= R (exterior mode only)
    None,
};

struct StoppingRule {
    StopKind kind = StopKind::FixedTime;
    double value = 0.0;

    static StoppingRule fixed_time(double t) { return {StopKind::FixedTime, t}; }
    static StoppingRule local_time_x(double b) { return {StopKind::LocalTimeX, b}; }
    static StoppingRule local_time_either(double b) { return {StopKind::LocalTimeEither, b}; }
    static StoppingRule hit_sphere() { return {StopKind::HitSphere, 0.0}; }
    static StoppingRule escape_radius(double r) { return {StopKind::EscapeRadius, r}; }
};

/// Time-stepping configuration.  dt is the base step; when far_field_scaling
/// is on, steps taken at boundary gap g use dt_eff = max(dt, (g*gap_fraction)^2),
/// i.e. the per-coordinate step deviation stays below gap_fraction*g.  The
/// near-boundary layer - where all of the scheme's O(sqrt(dt)) bias lives -
/// always runs at the base dt; away from it the Gaussian increments are exact
/// at any step size and missing a boundary crossing inside one step has
/// probability below exp(-2/gap_fraction^2).
struct StepPolicy {
    double dt = 1e-4;
    bool far_field_scaling = false;
    double gap_fraction = 1.0 / 6.0;
    std::uint64_t max_steps = 1000000000ull;
    std::size_t record_every = 0;
    bool record_contacts = false;
    bool record_increments = false;
    bool paranoid = false;

    double effective_dt(double gap) const {
        if (!far_field_scaling) return dt;
        const double s = gap * gap_fraction;
        const double scaled = s * s;
        return scaled > dt ? scaled : dt;
    }
};

struct TraceSample {
    double t;
    Vec3 x;
    double l;
    bool reflected;
};

/// Reflection event: the on-sphere point and cumulative local time after it.
struct Contact {
    double t;
    Vec3 point;
    double local_time;
    std::uint64_t step;
};

struct StepOutcome {
    double penetration = 0.0; // local-time increment of this step
    bool reflected = false;
};

/// One projection-scheme step: free move by `increment`, wrap into the cell,
/// and if the move landed inside the ball, project radially back onto the
/// sphere, crediting the penetration depth 1-|x'| to the local time.
StepOutcome step(RbmState& state, const Vec3& increment, double dt,
                 const DomainGeometry& geom);

struct SimResult {
    RbmState state;
    StopKind stopped_by = StopKind::None;
    std::uint64_t steps = 0;
    std::vector<TraceSample> trace;
    std::vector<Contact> contacts;
    std::vector<Vec3> increments;
};

SimResult simulate(const RbmState& init, NormalSource& noise,
                   std::span<const StoppingRule> rules, const DomainGeometry& geom,
                   const StepPolicy& policy);

inline SimResult simulate(const TorusPoint& x0, NormalSource& noise,
                          std::span<const StoppingRule> rules,
                          const DomainGeometry& geom, const StepPolicy& policy) {
    return simulate(RbmState{x0.r, 0.0, 0.0}, noise, rules, geom, policy);
}

struct PairSample {
    double t;
    double r; // minimal-image |X - Y|
    double m; // log r
    double lx;
    double ly;
};

/// Shared-noise pair.  Both components consume identical increments; local
/// time rules are relative to the local time each component carried in.
struct CoupledPath {
    RbmState x;
    RbmState y;
    StopKind stopped_by = StopKind::None;
    std::uint64_t steps = 0;
    std::vector<PairSample> series;
    std::vector<Contact> contacts_x;
    std::vector<Vec3> increments;
};

CoupledPath simulate_pair(const RbmState& x0, const RbmState& y0, NormalSource& noise,
                          std::span<const StoppingRule> rules,
                          const DomainGeometry& geom, const StepPolicy& policy);

inline CoupledPath simulate_pair(const TorusPoint& x0, const TorusPoint& y0,
                                 NormalSource& noise, std::span<const StoppingRule> rules,
                                 const DomainGeometry& geom, const StepPolicy& policy) {
    return simulate_pair(RbmState{x0.r, 0.0, 0.0}, RbmState{y0.r, 0.0, 0.0}, noise,
                         rules, geom, policy);
}

struct FirstPassage {
    bool hit = false;
    /// Unit vector of the landing point in the frame of the ball image that
    /// was hit (exactly |.| = 1); only meaningful when hit.
    Vec3 endpoint;
    double time = 0.0;
    std::uint64_t steps = 0;
};

/// Unreflected Brownian walk from x0 until it lands inside the unit ball
/// (the overshooting step is then bisected onto the sphere) or, in exterior
/// mode, reaches far_radius.  In torus mode every walk ends in a hit.
FirstPassage first_hit_or_escape(const TorusPoint& x0, NormalSource& noise,
                                 double far_radius, const DomainGeometry& geom,
                                 const StepPolicy& policy);

} // namespace rbmlab
