#ifndef HSURF_GEOMETRY_HPP
#define HSURF_GEOMETRY_HPP

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <variant>
#include <vector>

// Hyperbolic 3-space in the upper half-space and Poincare ball models:
// points, model conversion, metric densities, distances, and the small
// family of isometries the rest of the library needs.
namespace hsurf {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

enum class Model { UpperHalfSpace, PoincareBall };

/// A point of H^3 or of its ideal boundary, tagged by model.
/// In the UHS model the ideal boundary is {z = 0} plus the point at
/// infinity, which is stored as an explicit flag rather than a large
/// coordinate.
struct ModelPoint {
    Model model = Model::UpperHalfSpace;
    Vec3 coords = Vec3::Zero();
    bool at_infinity = false;   // ideal point (UHS z=0, ball norm=1, or infty)
    bool is_infty = false;      // the distinguished point "infinity" (UHS only)

    static ModelPoint uhs(double x, double y, double z) {
        if (z < 0.0) throw std::invalid_argument("UHS point needs z >= 0");
        return ModelPoint{Model::UpperHalfSpace, Vec3(x, y, z), z == 0.0, false};
    }
    static ModelPoint uhs_infinity() {
        return ModelPoint{Model::UpperHalfSpace, Vec3::Zero(), true, true};
    }
    static ModelPoint ball(double u, double v, double w) {
        const double n = Vec3(u, v, w).norm();
        if (n > 1.0 + 1e-12) throw std::invalid_argument("ball point needs norm <= 1");
        return ModelPoint{Model::PoincareBall, Vec3(u, v, w), n >= 1.0 - 1e-12, false};
    }

    bool interior() const { return !at_infinity; }
};

/// Canonical UHS -> ball isometry. Fixed so that UHS (0,0,1) maps to the
/// ball origin and the UHS point at infinity maps to the ball north pole
/// (0,0,1).
inline Vec3 uhs_to_ball_coords(const Vec3& p) {
    const double x = p.x(), y = p.y(), z = p.z();
    const double denom = x * x + y * y + (z + 1.0) * (z + 1.0);
    return Vec3(2.0 * x, 2.0 * y, x * x + y * y + z * z - 1.0) / denom;
}

inline Vec3 ball_to_uhs_coords(const Vec3& b) {
    const double u = b.x(), v = b.y(), w = b.z();
    const double denom = u * u + v * v + (w - 1.0) * (w - 1.0);
    return Vec3(2.0 * u, 2.0 * v, 1.0 - b.squaredNorm()) / denom;
}

inline ModelPoint convert_model(const ModelPoint& p, Model target) {
    if (p.model == target) return p;
    if (p.model == Model::UpperHalfSpace) {
        if (p.is_infty) return ModelPoint{Model::PoincareBall, Vec3(0, 0, 1), true, false};
        if (p.coords.z() < 0.0) throw std::invalid_argument("invalid UHS point");
        Vec3 b = uhs_to_ball_coords(p.coords);
        return ModelPoint{Model::PoincareBall, b, p.at_infinity, false};
    }
    // ball -> UHS
    if (p.coords.norm() > 1.0 + 1e-9) throw std::invalid_argument("invalid ball point");
    if ((p.coords - Vec3(0, 0, 1)).norm() < 1e-14) return ModelPoint::uhs_infinity();
    Vec3 u = ball_to_uhs_coords(p.coords);
    if (p.at_infinity) u.z() = 0.0;  // squash conversion noise on ideal points
    return ModelPoint{Model::UpperHalfSpace, u, p.at_infinity, false};
}

/// UHS area and volume conformal densities at height z: (1/z^2, 1/z^3).
struct MetricDensities {
    double area;
    double volume;
};

inline MetricDensities metric_densities(const ModelPoint& p) {
    if (p.model != Model::UpperHalfSpace || !p.interior())
        throw std::invalid_argument("metric_densities needs an interior UHS point");
    const double z = p.coords.z();
    if (z <= 0.0) throw std::invalid_argument("metric_densities needs z > 0");
    return {1.0 / (z * z), 1.0 / (z * z * z)};
}

inline double hyperbolic_distance_uhs(const Vec3& p, const Vec3& q) {
    const double z1 = p.z(), z2 = q.z();
    if (z1 <= 0.0 || z2 <= 0.0)
        throw std::invalid_argument("distance needs interior points");
    const double c = 1.0 + (p - q).squaredNorm() / (2.0 * z1 * z2);
    return std::acosh(std::max(1.0, c));
}

inline double hyperbolic_distance(const ModelPoint& a, const ModelPoint& b) {
    if (!a.interior() || !b.interior())
        throw std::invalid_argument("hyperbolic_distance rejects ideal points");
    const ModelPoint pu = convert_model(a, Model::UpperHalfSpace);
    const ModelPoint qu = convert_model(b, Model::UpperHalfSpace);
    return hyperbolic_distance_uhs(pu.coords, qu.coords);
}

// ---------------------------------------------------------------------------
// Isometries (UHS model).

struct ParabolicX { double t = 0.0; };                       // (x,y,z) -> (x+t,y,z)
struct HorizontalTranslate { double a = 0.0, b = 0.0; };     // (x,y,z) -> (x+a,y+b,z)
struct Dilation { double lambda = 1.0; };                    // p -> lambda p
struct Normalize { Vec3 base = Vec3(0, 0, 1); };             // base -> (0,0,1)
struct ParabolicAlongCircle { double t = 0.0; Vec2 fixed_point = Vec2::Zero(); };

using IsometryDescriptor =
    std::variant<ParabolicX, HorizontalTranslate, Dilation, Normalize, ParabolicAlongCircle>;

/// Composition of descriptors, applied left to right.
using Isometry = std::vector<IsometryDescriptor>;

namespace detail {

// Inversion in the unit sphere about the origin; an isometry of the UHS
// model (orientation-reversing, always used in pairs here).
struct InvPoint {
    Vec3 p = Vec3::Zero();
    bool infty = false;
};

inline InvPoint invert_unit_sphere(const InvPoint& q) {
    if (q.infty) return {Vec3::Zero(), false};
    const double n2 = q.p.squaredNorm();
    if (n2 == 0.0) return {Vec3::Zero(), true};
    return {q.p / n2, false};
}

inline InvPoint apply_one(const IsometryDescriptor& iso, InvPoint q) {
    if (const auto* px = std::get_if<ParabolicX>(&iso)) {
        if (!q.infty) q.p.x() += px->t;
        return q;
    }
    if (const auto* ht = std::get_if<HorizontalTranslate>(&iso)) {
        if (!q.infty) { q.p.x() += ht->a; q.p.y() += ht->b; }
        return q;
    }
    if (const auto* d = std::get_if<Dilation>(&iso)) {
        if (d->lambda <= 0.0) throw std::invalid_argument("Dilation needs lambda > 0");
        if (!q.infty) q.p *= d->lambda;
        return q;
    }
    if (const auto* n = std::get_if<Normalize>(&iso)) {
        if (n->base.z() <= 0.0) throw std::invalid_argument("Normalize needs base z > 0");
        if (!q.infty) {
            q.p.x() = (q.p.x() - n->base.x()) / n->base.z();
            q.p.y() = (q.p.y() - n->base.y()) / n->base.z();
            q.p.z() = q.p.z() / n->base.z();
        }
        return q;
    }
    const auto& pc = std::get<ParabolicAlongCircle>(iso);
    // Conjugate a horizontal y-translation by inversion, so the boundary
    // fixed point stays put and points move along circles through it.
    if (!q.infty) { q.p.x() -= pc.fixed_point.x(); q.p.y() -= pc.fixed_point.y(); }
    q = invert_unit_sphere(q);
    if (!q.infty) q.p.y() += pc.t;
    q = invert_unit_sphere(q);
    if (!q.infty) { q.p.x() += pc.fixed_point.x(); q.p.y() += pc.fixed_point.y(); }
    return q;
}

}  // namespace detail

inline ModelPoint apply_isometry(const IsometryDescriptor& iso, const ModelPoint& point) {
    const ModelPoint p = convert_model(point, Model::UpperHalfSpace);
    detail::InvPoint q{p.coords, p.is_infty};
    q = detail::apply_one(iso, q);
    ModelPoint out = q.infty ? ModelPoint::uhs_infinity()
                             : ModelPoint{Model::UpperHalfSpace, q.p, q.p.z() <= 0.0, false};
    if (point.model == Model::PoincareBall) return convert_model(out, Model::PoincareBall);
    return out;
}

inline ModelPoint apply_isometry(const Isometry& iso, const ModelPoint& point) {
    ModelPoint p = point;
    for (const auto& d : iso) p = apply_isometry(d, p);
    return p;
}

inline Isometry compose(const Isometry& first, const Isometry& then) {
    Isometry out = first;
    out.insert(out.end(), then.begin(), then.end());
    // Merge adjacent x-parabolics so ParabolicX(s)+ParabolicX(t) stays exact.
    Isometry merged;
    for (const auto& d : out) {
        if (!merged.empty()) {
            auto* a = std::get_if<ParabolicX>(&merged.back());
            const auto* b = std::get_if<ParabolicX>(&d);
            if (a && b) { a->t += b->t; continue; }
        }
        merged.push_back(d);
    }
    return merged;
}

/// Action of an isometry on a boundary point (z = 0); used for curve systems
/// at infinity. Returns false if the image is the point at infinity.
inline bool apply_isometry_boundary(const IsometryDescriptor& iso, const Vec2& p, Vec2& out) {
    ModelPoint mp = ModelPoint::uhs(p.x(), p.y(), 0.0);
    ModelPoint img = apply_isometry(iso, mp);
    if (img.is_infty) return false;
    out = Vec2(img.coords.x(), img.coords.y());
    return true;
}

}  // namespace hsurf

#endif  // HSURF_GEOMETRY_HPP
