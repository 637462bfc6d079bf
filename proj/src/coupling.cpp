#include "rbmlab/coupling.hpp"

#include <cmath>

namespace rbmlab {

LogSeparationLadder log_separation_ladder(const TorusPoint& x0, const TorusPoint& y0,
                                          double b, std::size_t rungs,
                                          NormalSource& noise, const DomainGeometry& geom,
                                          const StepPolicy& policy) {
    if (!(b > 0.0)) throw std::invalid_argument("log_separation_ladder: b must be > 0");
    const double r0 = geodesic_dist(x0, y0, geom);
    if (r0 == 0.0)
        throw std::invalid_argument("log_separation_ladder: x0 and y0 must differ");

    LogSeparationLadder out;
    out.b = b;
    out.log_sep.push_back(std::log(r0));
    out.ladder_times.push_back(0.0);
    out.local_x.push_back(0.0);
    out.local_y.push_back(0.0);

    RbmState sx{x0.r, 0.0, 0.0};
    RbmState sy{y0.r, 0.0, 0.0};
    const StoppingRule rule[] = {StoppingRule::local_time_either(b)};
    for (std::size_t k = 0; k < rungs; ++k) {
        const double lx_in = sx.local_time;
        const double ly_in = sy.local_time;
        CoupledPath seg = simulate_pair(sx, sy, noise, rule, geom, policy);
        if (seg.stopped_by != StopKind::LocalTimeEither) {
            out.budget_exhausted = true;
            break;
        }
        sx = seg.x;
        sy = seg.y;
        const double r = norm(geom.wrap(sx.position - sy.position));
        out.log_sep.push_back(std::log(r));
        out.ladder_times.push_back(sx.clock);
        out.local_x.push_back(sx.local_time);
        out.local_y.push_back(sy.local_time);
        out.overshoot.push_back(
            std::max(sx.local_time - lx_in, sy.local_time - ly_in) - b);
    }
    return out;
}

double alignment_ratio(const TorusPoint& x, const TorusPoint& y,
                       const DomainGeometry& geom) {
    const Vec3 n = inward_normal(x);
    const Vec3 d = min_image_diff(y, x, geom).v;
    const double nd = norm(d);
    if (nd == 0.0) throw std::invalid_argument("alignment_ratio: x and y coincide");
    return std::abs(dot(d, n)) / nd;
}

BigExcursionChain extract_big_excursions(std::span<const Contact> contacts,
                                         double total_local_time, double eps_star,
                                         const DomainGeometry& geom) {
    if (!(eps_star > 0.0))
        throw std::invalid_argument("extract_big_excursions: eps_star must be > 0");
    BigExcursionChain chain;
    chain.eps_star = eps_star;
    chain.total_local_time = total_local_time;
    if (contacts.empty()) return chain;

    chain.entries.push_back(BigExcursion{contacts[0].point, 0.0});
    double prev_start_ell = 0.0; // ell at the start of the pending segment
    for (std::size_t i = 0; i + 1 < contacts.size(); ++i) {
        const double disp =
            norm(geom.wrap(contacts[i + 1].point - contacts[i].point));
        if (disp >= eps_star) {
            // Big excursion starting at contact i: close the previous segment.
            chain.entries.back().delta_ell = contacts[i].local_time - prev_start_ell;
            prev_start_ell = contacts[i].local_time;
            chain.entries.push_back(BigExcursion{contacts[i + 1].point, 0.0});
        }
    }
    chain.entries.back().delta_ell = total_local_time - prev_start_ell;
    return chain;
}

Vec3 derivative_map(const BigExcursionChain& chain, double total_local_time,
                    const Vec3& v0) {
    Vec3 w = v0;
    for (const auto& e : chain.entries) {
        const Vec3 n = normalized(e.endpoint);
        w = w - dot(w, n) * n;
    }
    return std::exp(total_local_time) * w;
}

FlowDerivativeCheck check_flow_derivative(const TorusPoint& x, const Vec3& v, double eps,
                                          double b, NormalSource& noise,
                                          const DomainGeometry& geom,
                                          const StepPolicy& policy, double c4) {
    if (!(eps > 0.0)) throw std::invalid_argument("check_flow_derivative: eps must be > 0");
    if (!(b > 0.0)) throw std::invalid_argument("check_flow_derivative: b must be > 0");
    if (!(c4 > 0.0)) throw std::invalid_argument("check_flow_derivative: c4 must be > 0");
    (void)inward_normal(x); // validates that x sits on the sphere
    const Vec3 y0 = x.r + eps * v;
    if (norm(y0) < 1.0)
        throw std::invalid_argument("check_flow_derivative: x + eps*v leaves the domain");

    StepPolicy p = policy;
    p.record_contacts = true;
    const StoppingRule rule[] = {StoppingRule::local_time_x(b)};
    const CoupledPath path =
        simulate_pair(RbmState{x.r, 0.0, 0.0}, RbmState{y0, 0.0, 0.0}, noise, rule,
                      geom, p);
    if (path.stopped_by != StopKind::LocalTimeX)
        throw BudgetExceeded("check_flow_derivative: step budget exhausted");

    FlowDerivativeCheck out;
    out.eps = eps;
    out.eps_star = c4 * eps;
    out.local_time = path.x.local_time;
    out.steps = path.steps;
    out.finite_diff = geom.wrap(path.y.position - path.x.position) / eps;

    const BigExcursionChain chain = extract_big_excursions(
        path.contacts_x, path.x.local_time, out.eps_star, geom);
    out.product = derivative_map(chain, path.x.local_time, v);

    const double denom =
        std::max(std::max(norm(out.product), norm(out.finite_diff)), 1e-300);
    out.rel_err = norm(out.finite_diff - out.product) / denom;
    return out;
}

} // namespace rbmlab
