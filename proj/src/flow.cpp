#include "rbmlab/flow.hpp"

#include "rbmlab/simd.hpp"
#include "rbmlab/stats.hpp"

#include <algorithm>
#include <cmath>

namespace rbmlab {

ParticleEnsemble init_lattice(int n_per_axis, const DomainGeometry& geom) {
    if (n_per_axis < 2)
        throw std::invalid_argument("init_lattice: need at least 2 points per axis");
    if (!geom.is_torus())
        throw std::invalid_argument("init_lattice: lattice initialization needs a torus");
    const double rho = geom.rho();
    const double h = 2.0 * rho / n_per_axis;
    ParticleEnsemble ens;
    for (int i = 0; i < n_per_axis; ++i)
        for (int j = 0; j < n_per_axis; ++j)
            for (int k = 0; k < n_per_axis; ++k) {
                const Vec3 p{-rho + (i + 0.5) * h, -rho + (j + 0.5) * h,
                             -rho + (k + 0.5) * h};
                if (norm(p) < 1.0) continue; // inside the obstacle
                ens.xs.push_back(p.x);
                ens.ys.push_back(p.y);
                ens.zs.push_back(p.z);
                ens.ls.push_back(0.0);
                ens.origin.push_back(p);
            }
    return ens;
}

std::vector<Snapshot> evolve_ensemble(ParticleEnsemble& ens, NormalSource& noise,
                                      std::span<const double> snapshot_times,
                                      const DomainGeometry& geom,
                                      const StepPolicy& policy) {
    for (std::size_t i = 1; i < snapshot_times.size(); ++i)
        if (!(snapshot_times[i] > snapshot_times[i - 1]))
            throw std::invalid_argument("evolve_ensemble: snapshot times must increase");

    const auto& k = simd::kernels();
    const double dt = policy.dt;
    const double sd = std::sqrt(dt);
    std::vector<Snapshot> out;
    double t = 0.0;
    Vec3 driver{0.0, 0.0, 0.0};
    std::uint64_t steps = 0;

    auto take = [&]() {
        Snapshot s;
        s.t = t;
        s.driver = driver;
        s.xs = ens.xs;
        s.ys = ens.ys;
        s.zs = ens.zs;
        s.ls = ens.ls;
        out.push_back(std::move(s));
    };

    for (double target : snapshot_times) {
        while (t < target) {
            if (steps >= policy.max_steps)
                throw BudgetExceeded("evolve_ensemble: step budget exhausted");
            const Vec3 z = noise.next_vec3();
            const Vec3 dW{sd * z.x, sd * z.y, sd * z.z};
            const std::size_t degenerate = k.ensemble_step(
                ens.xs.data(), ens.ys.data(), ens.zs.data(), ens.ls.data(), ens.size(),
                dW.x, dW.y, dW.z, geom.rho(), geom.is_torus() ? 1 : 0);
            if (degenerate)
                throw DegenerateStep("evolve_ensemble: step landed at the obstacle center");
            driver += dW;
            t += dt;
            ++steps;
        }
        take();
    }
    return out;
}

namespace {

// Fraction of a bin's volume outside the unit ball, by 5^3 subsampling of
// bins that straddle the sphere.
double outside_fraction(const Vec3& lo, double h) {
    const Vec3 hi = lo + Vec3{h, h, h};
    double near2 = 0.0, far2 = 0.0;
    for (int d = 0; d < 3; ++d) {
        const double a = d == 0 ? lo.x : (d == 1 ? lo.y : lo.z);
        const double b = d == 0 ? hi.x : (d == 1 ? hi.y : hi.z);
        const double nearest = (a > 0.0) ? a : ((b < 0.0) ? -b : 0.0);
        const double farthest = std::max(std::abs(a), std::abs(b));
        near2 += nearest * nearest;
        far2 += farthest * farthest;
    }
    if (near2 >= 1.0) return 1.0;
    if (far2 <= 1.0) return 0.0;
    int outside = 0;
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j)
            for (int k = 0; k < 5; ++k) {
                const Vec3 c{lo.x + (i + 0.5) * h / 5.0, lo.y + (j + 0.5) * h / 5.0,
                             lo.z + (k + 0.5) * h / 5.0};
                if (norm2(c) >= 1.0) ++outside;
            }
    return outside / 125.0;
}

} // namespace

EmpiricalMeasure empirical_measure(const Snapshot& snap, int n_bins,
                                   const DomainGeometry& geom) {
    if (n_bins < 2) throw std::invalid_argument("empirical_measure: need n_bins >= 2");
    if (!geom.is_torus())
        throw std::invalid_argument("empirical_measure: needs a torus");
    const double rho = geom.rho();
    const double h = 2.0 * rho / n_bins;
    EmpiricalMeasure m;
    m.n_bins = n_bins;
    m.rho = rho;
    m.counts.assign(static_cast<std::size_t>(n_bins) * n_bins * n_bins, 0.0);
    m.corrected_volume.resize(m.counts.size());

    auto bin_of = [&](double c) {
        int b = static_cast<int>(std::floor((c + rho) / h));
        if (b < 0) b = 0;
        if (b >= n_bins) b = n_bins - 1;
        return b;
    };
    for (std::size_t i = 0; i < snap.xs.size(); ++i) {
        const std::size_t idx =
            (static_cast<std::size_t>(bin_of(snap.xs[i])) * n_bins +
             bin_of(snap.ys[i])) * n_bins + bin_of(snap.zs[i]);
        m.counts[idx] += 1.0;
    }
    m.total = static_cast<double>(snap.xs.size());

    const double bin_vol = h * h * h;
    for (int i = 0; i < n_bins; ++i)
        for (int j = 0; j < n_bins; ++j)
            for (int k = 0; k < n_bins; ++k) {
                const Vec3 lo{-rho + i * h, -rho + j * h, -rho + k * h};
                m.corrected_volume[(static_cast<std::size_t>(i) * n_bins + j) * n_bins + k] =
                    bin_vol * outside_fraction(lo, h);
            }
    return m;
}

UniformityMetrics uniformity_metric(const EmpiricalMeasure& m) {
    if (!(m.total > 0.0)) throw std::invalid_argument("uniformity_metric: empty measure");
    double vol = 0.0;
    std::size_t live = 0;
    for (double v : m.corrected_volume) {
        vol += v;
        if (v > 0.0) ++live;
    }
    UniformityMetrics u;
    u.dof = static_cast<double>(live) - 1.0;
    double chi = 0.0, tv = 0.0;
    for (std::size_t i = 0; i < m.counts.size(); ++i) {
        const double p = m.corrected_volume[i] / vol;
        const double expected = m.total * p;
        if (expected > 0.0) {
            const double d = m.counts[i] - expected;
            chi += d * d / expected;
        }
        tv += std::abs(m.counts[i] / m.total - p);
    }
    u.chi_square = chi;
    u.tv_distance = 0.5 * tv;
    return u;
}

std::vector<Vec3> earthworm_frame(const Snapshot& snap, const Vec3& cumulative_driver,
                                  const DomainGeometry& geom) {
    std::vector<Vec3> out;
    out.reserve(snap.xs.size());
    const Vec3 shift = geom.wrap(cumulative_driver);
    for (std::size_t i = 0; i < snap.xs.size(); ++i)
        out.push_back(geom.wrap(Vec3{snap.xs[i], snap.ys[i], snap.zs[i]} - shift));
    return out;
}

PairDistanceHistogram pair_distance_histogram(const TorusPoint& x0, const TorusPoint& y0,
                                              double horizon, NormalSource& noise,
                                              const DomainGeometry& geom,
                                              const StepPolicy& policy, int n_bins,
                                              double threshold) {
    if (!(horizon > 0.0))
        throw std::invalid_argument("pair_distance_histogram: horizon must be > 0");
    if (n_bins < 1) throw std::invalid_argument("pair_distance_histogram: need n_bins >= 1");

    const double span = geom.is_torus() ? geom.rho() * std::sqrt(3.0) : horizon;
    PairDistanceHistogram h;
    h.threshold = threshold;
    h.burn_in = 0.5 * horizon;
    h.horizon = horizon;
    h.edges.resize(n_bins + 1);
    for (int i = 0; i <= n_bins; ++i)
        h.edges[i] = span * static_cast<double>(i) / n_bins;
    h.mass.assign(n_bins, 0.0);

    RbmState sx{x0.r, 0.0, 0.0};
    RbmState sy{y0.r, 0.0, 0.0};
    double t = 0.0;
    double weight_total = 0.0;
    double below = 0.0;
    std::uint64_t steps = 0;

    while (t < horizon) {
        if (steps >= policy.max_steps)
            throw BudgetExceeded("pair_distance_histogram: step budget exhausted");
        const double gap = std::min(norm(sx.position), norm(sy.position)) - 1.0;
        double dt_eff = std::min(policy.effective_dt(gap), horizon - t);
        const Vec3 z = noise.next_vec3();
        const double sd = std::sqrt(dt_eff);
        const Vec3 dW{sd * z.x, sd * z.y, sd * z.z};
        step(sx, dW, dt_eff, geom);
        step(sy, dW, dt_eff, geom);
        t += dt_eff;
        ++steps;
        if (t >= h.burn_in) {
            const double r = norm(geom.wrap(sx.position - sy.position));
            int b = static_cast<int>(std::floor(r / span * n_bins));
            if (b >= n_bins) b = n_bins - 1;
            if (b < 0) b = 0;
            h.mass[b] += dt_eff;
            if (r < threshold) below += dt_eff;
            weight_total += dt_eff;
        }
    }
    if (weight_total > 0.0) {
        for (double& v : h.mass) v /= weight_total;
        h.mass_below_threshold = below / weight_total;
    }
    return h;
}

} // namespace rbmlab
