#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace rbmlab {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    Vec3() = default;
    Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    Vec3 operator-() const { return {-x, -y, -z}; }
    Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    bool operator==(const Vec3& o) const { return x == o.x && y == o.y && z == o.z; }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }
inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm2(const Vec3& v) { return dot(v, v); }
inline double norm(const Vec3& v) { return std::sqrt(norm2(v)); }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline bool finite(const Vec3& v) {
    return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}
inline Vec3 normalized(const Vec3& v) {
    const double n = norm(v);
    return {v.x / n, v.y / n, v.z / n};
}

/// Relative tolerance for "point lies on the unit sphere". States produced by
/// the reflection scheme sit exactly on the sphere; this only guards user input.
inline constexpr double kBoundaryTol = 1e-9;

enum class DomainMode { Torus, ExteriorFreeSpace };

/// The state space: either a flat 3-torus of side 2*rho minus the closed unit
/// ball at the origin (rho > 1 so the obstacle fits strictly inside the cell),
/// or the unbounded exterior of the unit ball with no wrapping at all.
class DomainGeometry {
public:
    static DomainGeometry torus(double rho) {
        if (!(rho > 1.0) || !std::isfinite(rho))
            throw std::invalid_argument("DomainGeometry: torus requires rho > 1, got " +
                                        std::to_string(rho));
        return DomainGeometry(DomainMode::Torus, rho);
    }
    static DomainGeometry exterior() {
        return DomainGeometry(DomainMode::ExteriorFreeSpace, 0.0);
    }

    DomainMode mode() const { return mode_; }
    bool is_torus() const { return mode_ == DomainMode::Torus; }
    double rho() const { return rho_; }
    double side() const { return 2.0 * rho_; }

    /// Componentwise wrap into the canonical cell [-rho, rho).  Identity in
    /// exterior mode.  Assumes finite input (hot path, no checks).
    Vec3 wrap(const Vec3& p) const {
        if (!is_torus()) return p;
        return {wrap1(p.x), wrap1(p.y), wrap1(p.z)};
    }

    double wrap1(double c) const {
        const double L = 2.0 * rho_;
        double w = c - L * std::floor((c + rho_) / L);
        // floor can land on either side of the half-open cell at rounding ties
        if (w >= rho_) w -= L;
        if (w < -rho_) w += L;
        return w;
    }

private:
    DomainGeometry(DomainMode m, double r) : mode_(m), rho_(r) {}
    DomainMode mode_;
    double rho_;
};

/// A point in the canonical cell (each coordinate in [-rho, rho)).
struct TorusPoint {
    Vec3 r;
};

/// Minimal-image displacement between two torus points.
struct TorusVector {
    Vec3 v;
};

/// Map raw coordinates into the canonical cell.  Idempotent; ties at
/// |coordinate| = rho resolve to -rho, so this is a true function.
inline TorusPoint canonicalize(const Vec3& raw, const DomainGeometry& geom) {
    if (!finite(raw))
        throw std::invalid_argument("canonicalize: non-finite coordinate");
    return TorusPoint{geom.wrap(raw)};
}

/// Representative of x - y with minimal Euclidean norm among all periodic
/// images.  On a cubic torus the per-component nearest image is jointly
/// nearest, so this is the same wrap that canonicalize uses.
inline TorusVector min_image_diff(const TorusPoint& x, const TorusPoint& y,
                                  const DomainGeometry& geom) {
    if (!finite(x.r) || !finite(y.r))
        throw std::invalid_argument("min_image_diff: non-finite coordinate");
    return TorusVector{geom.wrap(x.r - y.r)};
}

inline double geodesic_dist(const TorusPoint& x, const TorusPoint& y,
                            const DomainGeometry& geom) {
    return norm(min_image_diff(x, y, geom).v);
}

inline bool on_sphere(const Vec3& p, double tol = kBoundaryTol) {
    return std::abs(norm(p) - 1.0) <= tol;
}

/// Unit inward normal at a boundary point.  D is the exterior of the ball, so
/// inward means radially away from the origin: n(x) = x/|x|.
inline Vec3 inward_normal(const TorusPoint& x) {
    const double n = norm(x.r);
    if (std::abs(n - 1.0) > kBoundaryTol)
        throw std::invalid_argument("inward_normal: point not on the unit sphere (|x| = " +
                                    std::to_string(n) + ")");
    return x.r / n;
}

/// Orthogonal projection of v onto the tangent plane at a sphere point.
inline Vec3 tangent_project(const TorusPoint& x, const Vec3& v) {
    const Vec3 n = inward_normal(x);
    return v - dot(v, n) * n;
}

/// The shape operator of the unit sphere is the identity on tangent vectors.
inline Vec3 shape_apply(const TorusPoint& x, const Vec3& v) {
    const Vec3 n = inward_normal(x);
    const double nv = norm(v);
    if (nv > 0.0 && std::abs(dot(v, n)) > 1e-9 * nv)
        throw std::invalid_argument("shape_apply: v is not tangent at x");
    return v;
}

} // namespace rbmlab
