#include "rbmlab/sde.hpp"

#include <algorithm>
#include <cmath>

namespace rbmlab {

namespace {

inline bool has_rule(std::span<const StoppingRule> rules, StopKind k, double* value = nullptr) {
    for (const auto& r : rules) {
        if (r.kind == k) {
            if (value) *value = r.value;
            return true;
        }
    }
    return false;
}

inline void validate_rules(std::span<const StoppingRule> rules, const DomainGeometry& geom,
                           bool pair) {
    if (rules.empty()) throw std::invalid_argument("simulate: no stopping rule");
    for (const auto& r : rules) {
        switch (r.kind) {
        case StopKind::FixedTime:
            if (!(r.value >= 0.0)) throw std::invalid_argument("FixedTime: T must be >= 0");
            break;
        case StopKind::LocalTimeX:
        case StopKind::LocalTimeEither:
            if (!(r.value > 0.0)) throw std::invalid_argument("LocalTime rule: b must be > 0");
            if (r.kind == StopKind::LocalTimeEither && !pair)
                throw std::invalid_argument("LocalTimeEither applies to coupled pairs only");
            break;
        case StopKind::EscapeRadius:
            if (geom.is_torus())
                throw std::invalid_argument("EscapeRadius is only valid in exterior mode");
            if (!(r.value > 1.0)) throw std::invalid_argument("EscapeRadius: R must be > 1");
            break;
        case StopKind::HitSphere:
            if (pair) throw std::invalid_argument("HitSphere is not defined for pairs");
            break;
        case StopKind::None:
            throw std::invalid_argument("invalid stopping rule");
        }
    }
}

struct HotState {
    Vec3 p;
    double l;
    double t;
};

/// Single projection step on unpacked state; returns penetration depth.
inline double hot_step(HotState& s, const Vec3& dW, const DomainGeometry& geom) {
    Vec3 q = geom.wrap(s.p + dW);
    const double r2 = norm2(q);
    double pen = 0.0;
    if (r2 < 1.0) {
        if (r2 == 0.0)
            throw DegenerateStep("step landed exactly at the obstacle center");
        const double r = std::sqrt(r2);
        q = q / r;
        pen = 1.0 - r;
        s.l += pen;
    }
    s.p = q;
    return pen;
}

} // namespace

StepOutcome step(RbmState& state, const Vec3& increment, double dt,
                 const DomainGeometry& geom) {
    if (!finite(increment)) throw std::invalid_argument("step: non-finite increment");
    HotState h{state.position, state.local_time, state.clock};
    const double pen = hot_step(h, increment, geom);
    state.position = h.p;
    state.local_time = h.l;
    state.clock += dt;
    return StepOutcome{pen, pen > 0.0};
}

SimResult simulate(const RbmState& init, NormalSource& noise,
                   std::span<const StoppingRule> rules, const DomainGeometry& geom,
                   const StepPolicy& policy) {
    validate_rules(rules, geom, false);
    if (norm(init.position) < 1.0 - kBoundaryTol)
        throw std::invalid_argument("simulate: start inside the obstacle");

    double fixed_T = 0.0;
    const bool want_T = has_rule(rules, StopKind::FixedTime, &fixed_T);
    double lt_b = 0.0;
    const bool want_lt = has_rule(rules, StopKind::LocalTimeX, &lt_b);
    const bool want_hit = has_rule(rules, StopKind::HitSphere);
    double esc_R = 0.0;
    const bool want_esc = has_rule(rules, StopKind::EscapeRadius, &esc_R);

    SimResult out;
    HotState s{init.position, init.local_time, init.clock};
    const double l0 = init.local_time;
    const double t0 = init.clock;

    auto sample = [&](bool reflected) {
        out.trace.push_back(TraceSample{s.t, s.p, s.l, reflected});
    };
    if (policy.record_every > 0) sample(false);

    for (;;) {
        if (want_T && s.t - t0 >= fixed_T) { out.stopped_by = StopKind::FixedTime; break; }
        if (want_esc && norm(s.p) >= esc_R) { out.stopped_by = StopKind::EscapeRadius; break; }
        if (out.steps >= policy.max_steps) { out.stopped_by = StopKind::None; break; }

        double dt_eff = policy.effective_dt(norm(s.p) - 1.0);
        if (want_T) dt_eff = std::min(dt_eff, fixed_T - (s.t - t0));
        const double sd = std::sqrt(dt_eff);
        const Vec3 z = noise.next_vec3();
        const Vec3 dW{sd * z.x, sd * z.y, sd * z.z};
        if (policy.record_increments) out.increments.push_back(dW);

        const double pen = hot_step(s, dW, geom);
        s.t += dt_eff;
        ++out.steps;

        if (policy.paranoid && norm(s.p) < 1.0 - 1e-12)
            throw std::logic_error("invariant violated: position inside the obstacle");

        const bool reflected = pen > 0.0;
        if (reflected && policy.record_contacts)
            out.contacts.push_back(Contact{s.t, s.p, s.l, out.steps});
        if (policy.record_every > 0 && out.steps % policy.record_every == 0)
            sample(reflected);

        if (reflected && want_hit) { out.stopped_by = StopKind::HitSphere; break; }
        if (want_lt && s.l - l0 >= lt_b) { out.stopped_by = StopKind::LocalTimeX; break; }
    }

    if (policy.record_every > 0 &&
        (out.trace.empty() || out.trace.back().t != s.t))
        sample(false);
    out.state = RbmState{s.p, s.l, s.t};
    return out;
}

CoupledPath simulate_pair(const RbmState& x0, const RbmState& y0, NormalSource& noise,
                          std::span<const StoppingRule> rules,
                          const DomainGeometry& geom, const StepPolicy& policy) {
    validate_rules(rules, geom, true);
    if (norm(x0.position) < 1.0 - kBoundaryTol || norm(y0.position) < 1.0 - kBoundaryTol)
        throw std::invalid_argument("simulate_pair: start inside the obstacle");

    double fixed_T = 0.0;
    const bool want_T = has_rule(rules, StopKind::FixedTime, &fixed_T);
    double ltx_b = 0.0;
    const bool want_ltx = has_rule(rules, StopKind::LocalTimeX, &ltx_b);
    double lte_b = 0.0;
    const bool want_lte = has_rule(rules, StopKind::LocalTimeEither, &lte_b);
    double esc_R = 0.0;
    const bool want_esc = has_rule(rules, StopKind::EscapeRadius, &esc_R);

    CoupledPath out;
    HotState sx{x0.position, x0.local_time, x0.clock};
    HotState sy{y0.position, y0.local_time, y0.clock};
    const double lx0 = x0.local_time, ly0 = y0.local_time;
    const double t0 = x0.clock;
    double t = t0;

    auto sample = [&]() {
        const double r = norm(geom.wrap(sx.p - sy.p));
        out.series.push_back(PairSample{t, r, std::log(r), sx.l, sy.l});
    };
    if (policy.record_every > 0) sample();

    for (;;) {
        if (want_T && t - t0 >= fixed_T) { out.stopped_by = StopKind::FixedTime; break; }
        if (want_esc && (norm(sx.p) >= esc_R || norm(sy.p) >= esc_R)) {
            out.stopped_by = StopKind::EscapeRadius;
            break;
        }
        if (out.steps >= policy.max_steps) { out.stopped_by = StopKind::None; break; }

        const double gap = std::min(norm(sx.p), norm(sy.p)) - 1.0;
        double dt_eff = policy.effective_dt(gap);
        if (want_T) dt_eff = std::min(dt_eff, fixed_T - (t - t0));
        const double sd = std::sqrt(dt_eff);
        const Vec3 z = noise.next_vec3();
        const Vec3 dW{sd * z.x, sd * z.y, sd * z.z};
        if (policy.record_increments) out.increments.push_back(dW);

        const double pen_x = hot_step(sx, dW, geom);
        hot_step(sy, dW, geom);
        t += dt_eff;
        ++out.steps;

        if (policy.paranoid &&
            (norm(sx.p) < 1.0 - 1e-12 || norm(sy.p) < 1.0 - 1e-12))
            throw std::logic_error("invariant violated: position inside the obstacle");

        if (pen_x > 0.0 && policy.record_contacts)
            out.contacts_x.push_back(Contact{t, sx.p, sx.l, out.steps});
        if (policy.record_every > 0 && out.steps % policy.record_every == 0) sample();

        if (want_ltx && sx.l - lx0 >= ltx_b) { out.stopped_by = StopKind::LocalTimeX; break; }
        if (want_lte && std::max(sx.l - lx0, sy.l - ly0) >= lte_b) {
            out.stopped_by = StopKind::LocalTimeEither;
            break;
        }
    }

    if (policy.record_every > 0 && (out.series.empty() || out.series.back().t != t)) sample();
    out.x = RbmState{sx.p, sx.l, t};
    out.y = RbmState{sy.p, sy.l, t};
    return out;
}

FirstPassage first_hit_or_escape(const TorusPoint& x0, NormalSource& noise,
                                 double far_radius, const DomainGeometry& geom,
                                 const StepPolicy& policy) {
    const double r0 = norm(x0.r);
    if (!(r0 > 1.0))
        throw std::invalid_argument("first_hit_or_escape: start must lie outside the sphere");
    if (!geom.is_torus() && !(far_radius > 1.0))
        throw std::invalid_argument("first_hit_or_escape: far_radius must exceed 1");

    Vec3 p = x0.r;
    double t = 0.0;
    FirstPassage out;

    for (;;) {
        if (!geom.is_torus() && norm(p) >= far_radius) {
            out.hit = false;
            out.time = t;
            return out;
        }
        if (out.steps >= policy.max_steps)
            throw BudgetExceeded("first_hit_or_escape: step budget exhausted");

        const double dt_eff = policy.effective_dt(norm(p) - 1.0);
        const double sd = std::sqrt(dt_eff);
        const Vec3 z = noise.next_vec3();
        const Vec3 dW{sd * z.x, sd * z.y, sd * z.z};
        const Vec3 raw = p + dW;
        const Vec3 q = geom.wrap(raw);
        ++out.steps;

        if (norm2(q) <= 1.0) {
            // Ball image that was hit: raw and q differ by an exact lattice shift.
            Vec3 c{0.0, 0.0, 0.0};
            if (geom.is_torus()) {
                const double L = geom.side();
                c = Vec3{L * std::round((raw.x - q.x) / L), L * std::round((raw.y - q.y) / L),
                         L * std::round((raw.z - q.z) / L)};
            }
            const Vec3 a = p - c; // |a| > 1
            double lo = 0.0, hi = 1.0;
            for (int it = 0; it < 80; ++it) {
                const double mid = 0.5 * (lo + hi);
                const Vec3 e = a + mid * dW;
                if (norm2(e) > 1.0)
                    lo = mid;
                else
                    hi = mid;
            }
            const double s = 0.5 * (lo + hi);
            out.hit = true;
            out.endpoint = normalized(a + s * dW);
            out.time = t + s * dt_eff;
            return out;
        }
        p = q;
        t += dt_eff;
    }
}

} // namespace rbmlab
