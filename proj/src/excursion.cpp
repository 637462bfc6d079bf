#include "rbmlab/excursion.hpp"

#include "rbmlab/parallel.hpp"
#include "rbmlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace rbmlab {

double endpoint_density(const Vec3& x_unit, const Vec3& y_unit) {
    const double d = norm(x_unit - y_unit);
    if (d == 0.0)
        throw std::invalid_argument("endpoint_density: coincident points (singular)");
    return 2.0 / (d * d * d);
}

double angle_density(const AngleCoords& a) {
    if (!(a.alpha > 0.0))
        throw std::invalid_argument("angle_density: alpha must be in (0, pi]");
    const double s = std::sin(0.5 * a.alpha);
    return std::sin(a.alpha) / (16.0 * M_PI * s * s * s);
}

double f_value(const AngleCoords& a) {
    const double sb = std::sin(a.beta);
    const double sa = std::sin(a.alpha);
    const double t = sb * sa;
    // cos^2 b + sin^2 b cos^2 a = 1 - sin^2 b sin^2 a
    const double arg = -t * t;
    if (arg <= -1.0) return -std::numeric_limits<double>::infinity();
    return 0.5 * std::log1p(arg);
}

double f_of_projection(const Vec3& y_unit, const Vec3& v_unit) {
    const double c = dot(y_unit, v_unit);
    const double arg = -c * c;
    if (arg <= -1.0) return -std::numeric_limits<double>::infinity();
    return 0.5 * std::log1p(arg);
}

double truncated_mass(double eps_cut) {
    if (!(eps_cut > 0.0 && eps_cut <= 2.0))
        throw std::invalid_argument("truncated_mass: eps_cut must be in (0, 2]");
    return 1.0 / eps_cut - 0.5;
}

double hit_angle_cdf(double alpha, double delta, double cutoff_alpha) {
    if (delta < 0.0) throw std::invalid_argument("hit_angle_cdf: delta must be >= 0");
    const double s = 1.0 + delta;
    auto g = [s](double a) {
        return 1.0 / std::sqrt(s * s + 1.0 - 2.0 * s * std::cos(a));
    };
    if (delta == 0.0 && !(cutoff_alpha > 0.0))
        throw std::invalid_argument("hit_angle_cdf: the delta=0 law needs a positive cutoff");
    const double lo = g(cutoff_alpha > 0.0 ? cutoff_alpha : 0.0);
    const double hi = g(M_PI);
    if (alpha <= cutoff_alpha) return 0.0;
    if (alpha >= M_PI) return 1.0;
    return (lo - g(alpha)) / (lo - hi);
}

double truncated_alpha_cdf(double alpha, double eps_cut) {
    if (!(eps_cut > 0.0 && eps_cut < 2.0))
        throw std::invalid_argument("truncated_alpha_cdf: eps_cut must be in (0, 2)");
    return hit_angle_cdf(alpha, 0.0, 2.0 * std::asin(0.5 * eps_cut));
}

AngleCoords sample_truncated_endpoint(double eps_cut, UniformSource& rng) {
    if (!(eps_cut > 0.0 && eps_cut <= 2.0))
        throw std::invalid_argument("sample_truncated_endpoint: eps_cut must be in (0, 2]");
    AngleCoords a;
    a.beta = 2.0 * M_PI * rng.next_double();
    if (eps_cut == 2.0) {
        a.alpha = M_PI;
        return a;
    }
    const double alpha_c = 2.0 * std::asin(0.5 * eps_cut);
    const double u = rng.next_double();
    double lo = alpha_c, hi = M_PI;
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        if (truncated_alpha_cdf(mid, eps_cut) < u)
            lo = mid;
        else
            hi = mid;
    }
    a.alpha = 0.5 * (lo + hi);
    return a;
}

namespace {

struct RunChunk {
    MeanAccumulator acc;
    std::uint64_t hits = 0;
    std::uint64_t escapes = 0;
};

constexpr std::uint64_t kChunkRuns = 4096;

} // namespace

HfEstimate estimate_Hf_mc(const TorusPoint& x, const Vec3& v, double delta, double dt,
                          std::uint64_t n_runs, double far_radius,
                          const DomainGeometry& geom, std::uint64_t seed,
                          unsigned threads) {
    if (!(delta > 0.0)) throw std::invalid_argument("estimate_Hf_mc: delta must be > 0");
    if (!(dt > 0.0)) throw std::invalid_argument("estimate_Hf_mc: dt must be > 0");
    if (std::sqrt(dt) > delta / 10.0)
        throw std::invalid_argument("estimate_Hf_mc: dt too coarse relative to delta "
                                    "(need sqrt(dt) <= delta/10)");
    if (n_runs == 0) throw std::invalid_argument("estimate_Hf_mc: N must be >= 1");
    if (!on_sphere(x.r)) throw std::invalid_argument("estimate_Hf_mc: x must lie on the sphere");
    const double nv = norm(v);
    if (std::abs(nv - 1.0) > 1e-9)
        throw std::invalid_argument("estimate_Hf_mc: v must be a unit vector");
    const Vec3 n = inward_normal(x);
    if (std::abs(dot(v, n)) > 1e-9)
        throw std::invalid_argument("estimate_Hf_mc: v must be tangent at x");
    if (!geom.is_torus() && !(far_radius > 1.0 + delta))
        throw std::invalid_argument("estimate_Hf_mc: far_radius must exceed 1 + delta");

    const Vec3 start = x.r + delta * n;
    StepPolicy policy;
    policy.dt = dt;
    policy.far_field_scaling = true;

    const std::uint64_t n_chunks = (n_runs + kChunkRuns - 1) / kChunkRuns;
    std::vector<RunChunk> chunks(n_chunks);

    parallel_chunks(n_chunks, threads, [&](std::size_t c) {
        thread_local NormalSource src(0, 0);
        RunChunk& ch = chunks[c];
        const std::uint64_t lo = c * kChunkRuns;
        const std::uint64_t hi = std::min<std::uint64_t>(lo + kChunkRuns, n_runs);
        for (std::uint64_t run = lo; run < hi; ++run) {
            src.reset(seed, kStreamBaseRuns + run);
            const FirstPassage fp =
                first_hit_or_escape(TorusPoint{start}, src, far_radius, geom, policy);
            if (fp.hit) {
                ch.acc.add(f_of_projection(fp.endpoint, v));
                ++ch.hits;
            } else {
                ch.acc.add(0.0);
                ++ch.escapes;
            }
        }
    });

    RunChunk total;
    for (const auto& ch : chunks) {
        total.acc.merge(ch.acc);
        total.hits += ch.hits;
        total.escapes += ch.escapes;
    }

    HfEstimate est;
    est.mean = total.acc.mean() / delta;
    est.stderr = total.acc.stderr_of_mean() / delta;
    est.n_hit = total.hits;
    est.n_escape = total.escapes;
    est.delta = delta;
    est.dt = dt;
    est.n_runs = n_runs;
    return est;
}

HarmonicValidation validate_harmonic(double delta, double dt, std::uint64_t n_runs,
                                     double far_radius, double cutoff,
                                     std::uint64_t seed, unsigned threads) {
    if (!(delta > 0.0) || !(dt > 0.0) || n_runs == 0)
        throw std::invalid_argument("validate_harmonic: need delta > 0, dt > 0, N >= 1");
    if (std::sqrt(dt) > delta / 10.0)
        throw std::invalid_argument("validate_harmonic: dt too coarse relative to delta");
    if (!(cutoff > 0.0 && cutoff < 2.0))
        throw std::invalid_argument("validate_harmonic: cutoff must be in (0, 2)");

    const DomainGeometry geom = DomainGeometry::exterior();
    const Vec3 xhat{1.0, 0.0, 0.0};
    const Vec3 start = xhat * (1.0 + delta);
    const double alpha_c = 2.0 * std::asin(0.5 * cutoff);

    StepPolicy policy;
    policy.dt = dt;
    policy.far_field_scaling = true;

    const std::uint64_t n_chunks = (n_runs + kChunkRuns - 1) / kChunkRuns;
    struct AngleChunk {
        std::vector<double> kept;
        std::uint64_t hits = 0;
        std::uint64_t escapes = 0;
    };
    std::vector<AngleChunk> chunks(n_chunks);

    parallel_chunks(n_chunks, threads, [&](std::size_t c) {
        thread_local NormalSource src(0, 0);
        AngleChunk& ch = chunks[c];
        const std::uint64_t lo = c * kChunkRuns;
        const std::uint64_t hi = std::min<std::uint64_t>(lo + kChunkRuns, n_runs);
        for (std::uint64_t run = lo; run < hi; ++run) {
            src.reset(seed, kStreamBaseRuns + run);
            const FirstPassage fp =
                first_hit_or_escape(TorusPoint{start}, src, far_radius, geom, policy);
            if (!fp.hit) {
                ++ch.escapes;
                continue;
            }
            ++ch.hits;
            const double alpha =
                std::atan2(norm(cross(xhat, fp.endpoint)), dot(xhat, fp.endpoint));
            if (alpha >= alpha_c) ch.kept.push_back(alpha);
        }
    });

    HarmonicValidation out;
    std::vector<double> kept;
    for (const auto& ch : chunks) {
        out.n_hit += ch.hits;
        out.n_escape += ch.escapes;
        kept.insert(kept.end(), ch.kept.begin(), ch.kept.end());
    }
    out.n_kept = kept.size();
    out.cutoff = cutoff;
    if (kept.empty()) return out;

    out.ks_truncated = ks_statistic(
        kept, [&](double a) { return hit_angle_cdf(a, delta, alpha_c); });
    out.ks_limit_law = ks_statistic(
        kept, [&](double a) { return hit_angle_cdf(a, 0.0, alpha_c); });
    out.ks_critical_1pct = ks_critical(kept.size());
    out.pass_1pct = out.ks_limit_law < out.ks_critical_1pct;
    return out;
}

} // namespace rbmlab
