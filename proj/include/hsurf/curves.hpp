#ifndef HSURF_CURVES_HPP
#define HSURF_CURVES_HPP

#include <hsurf/geometry.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

// Curve systems on the boundary plane {z = 0}: ideal curves, region
// decomposition, bridge arcs, linking and separation predicates.
namespace hsurf {

enum class Orientation { CCW, CW };

/// A simple curve on the ideal boundary, stored as a dense polyline in the
/// {z = 0} chart. Curves through infinity are open polylines in the chart
/// (both ends running off to large radius) flagged `through_infinity`.
struct IdealCurve {
    std::vector<Vec2> samples;
    bool closed = true;
    Orientation orientation = Orientation::CCW;  // CCW: bounded region on the left
    bool through_infinity = false;

    int size() const { return static_cast<int>(samples.size()); }

    const Vec2& at(int i) const {
        const int n = size();
        return samples[((i % n) + n) % n];
    }

    /// Unit tangent at sample i (central difference; one-sided at open ends).
    Vec2 tangent(int i) const {
        const int n = size();
        Vec2 d;
        if (closed) {
            d = at(i + 1) - at(i - 1);
        } else if (i <= 0) {
            d = samples[1] - samples[0];
        } else if (i >= n - 1) {
            d = samples[n - 1] - samples[n - 2];
        } else {
            d = samples[i + 1] - samples[i - 1];
        }
        const double len = d.norm();
        if (len == 0.0) throw std::invalid_argument("degenerate curve sample spacing");
        return d / len;
    }

    double length() const {
        double L = 0.0;
        for (int i = 0; i + 1 < size(); ++i) L += (samples[i + 1] - samples[i]).norm();
        if (closed && size() > 1) L += (samples.front() - samples.back()).norm();
        return L;
    }

    /// Signed area by the shoelace formula (closed curves only); positive for CCW.
    double signed_area() const {
        double a = 0.0;
        const int n = size();
        for (int i = 0; i < n; ++i) {
            const Vec2& p = samples[i];
            const Vec2& q = samples[(i + 1) % n];
            a += p.x() * q.y() - q.x() * p.y();
        }
        return 0.5 * a;
    }

    void reverse() {
        std::reverse(samples.begin(), samples.end());
        orientation = orientation == Orientation::CCW ? Orientation::CW : Orientation::CCW;
    }
};

inline IdealCurve make_circle(const Vec2& center, double radius, int n = 256,
                              Orientation orient = Orientation::CCW) {
    if (radius <= 0.0 || n < 3) throw std::invalid_argument("make_circle: bad parameters");
    IdealCurve c;
    c.samples.reserve(n);
    for (int i = 0; i < n; ++i) {
        const double th = 2.0 * M_PI * i / n;
        c.samples.emplace_back(center.x() + radius * std::cos(th),
                               center.y() + radius * std::sin(th));
    }
    if (orient == Orientation::CW) {
        std::reverse(c.samples.begin(), c.samples.end());
        c.orientation = Orientation::CW;
    }
    return c;
}

/// Resample a polyline to m points uniformly by arc length, preserving the
/// first sample (and, for open curves, the last).
inline IdealCurve resample_by_arclength(const IdealCurve& c, int m) {
    if (m < 3 || c.size() < 2) throw std::invalid_argument("resample: bad parameters");
    const int n = c.size();
    const int nseg = c.closed ? n : n - 1;
    std::vector<double> cum(nseg + 1, 0.0);
    for (int i = 0; i < nseg; ++i) cum[i + 1] = cum[i] + (c.at(i + 1) - c.at(i)).norm();
    const double L = cum[nseg];
    IdealCurve out = c;
    out.samples.clear();
    out.samples.reserve(m);
    const int mk = c.closed ? m : m - 1;  // closed: m points, no duplicate endpoint
    int seg = 0;
    for (int k = 0; k < (c.closed ? m : m); ++k) {
        const double s = L * (c.closed ? double(k) / m : double(k) / mk);
        while (seg + 1 < nseg && cum[seg + 1] < s) ++seg;
        const double denom = cum[seg + 1] - cum[seg];
        const double u = denom > 0.0 ? (s - cum[seg]) / denom : 0.0;
        out.samples.push_back(c.at(seg) + u * (c.at(seg + 1) - c.at(seg)));
    }
    if (!c.closed) out.samples.back() = c.samples.back();
    return out;
}

// ---------------------------------------------------------------------------
// Planar primitives.

inline double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b, Vec2* closest = nullptr) {
    const Vec2 ab = b - a;
    const double n2 = ab.squaredNorm();
    double u = n2 > 0.0 ? (p - a).dot(ab) / n2 : 0.0;
    u = std::clamp(u, 0.0, 1.0);
    const Vec2 q = a + u * ab;
    if (closest) *closest = q;
    return (p - q).norm();
}

struct NearestHit {
    double distance = std::numeric_limits<double>::infinity();
    int component = -1;
    int segment = -1;
    Vec2 point = Vec2::Zero();
};

inline NearestHit nearest_on_curve(const Vec2& p, const IdealCurve& c) {
    NearestHit hit;
    const int nseg = c.closed ? c.size() : c.size() - 1;
    for (int i = 0; i < nseg; ++i) {
        Vec2 q;
        const double d = point_segment_distance(p, c.at(i), c.at(i + 1), &q);
        if (d < hit.distance) hit = NearestHit{d, 0, i, q};
    }
    return hit;
}

inline bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    auto cross = [](const Vec2& u, const Vec2& v) { return u.x() * v.y() - u.y() * v.x(); };
    const double d1 = cross(b - a, c - a), d2 = cross(b - a, d - a);
    const double d3 = cross(d - c, a - c), d4 = cross(d - c, b - c);
    if (((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0))) return true;
    auto on = [&](const Vec2& u, const Vec2& v, const Vec2& w) {
        return std::abs(cross(v - u, w - u)) < 1e-14 && (w - u).dot(w - v) <= 0.0;
    };
    return on(a, b, c) || on(a, b, d) || on(c, d, a) || on(c, d, b);
}

inline bool curve_self_intersects(const IdealCurve& c) {
    const int nseg = c.closed ? c.size() : c.size() - 1;
    for (int i = 0; i < nseg; ++i) {
        for (int j = i + 2; j < nseg; ++j) {
            if (c.closed && i == 0 && j == nseg - 1) continue;  // shared vertex
            if (segments_intersect(c.at(i), c.at(i + 1), c.at(j), c.at(j + 1))) return true;
        }
    }
    return false;
}

inline bool curves_intersect(const IdealCurve& a, const IdealCurve& b) {
    const int na = a.closed ? a.size() : a.size() - 1;
    const int nb = b.closed ? b.size() : b.size() - 1;
    for (int i = 0; i < na; ++i)
        for (int j = 0; j < nb; ++j)
            if (segments_intersect(a.at(i), a.at(i + 1), b.at(j), b.at(j + 1))) return true;
    return false;
}

inline double curves_min_distance(const IdealCurve& a, const IdealCurve& b) {
    double d = std::numeric_limits<double>::infinity();
    for (const Vec2& p : a.samples) d = std::min(d, nearest_on_curve(p, b).distance);
    for (const Vec2& p : b.samples) d = std::min(d, nearest_on_curve(p, a).distance);
    if (curves_intersect(a, b)) return 0.0;
    return d;
}

inline double hausdorff_distance(const std::vector<Vec2>& A, const std::vector<Vec2>& B) {
    auto one_sided = [](const std::vector<Vec2>& X, const std::vector<Vec2>& Y) {
        double h = 0.0;
        for (const Vec2& p : X) {
            double d = std::numeric_limits<double>::infinity();
            for (const Vec2& q : Y) d = std::min(d, (p - q).norm());
            h = std::max(h, d);
        }
        return h;
    };
    return std::max(one_sided(A, B), one_sided(B, A));
}

/// Crossing parity of a vertical upward ray from p against the curve.
inline bool ray_crossing_parity_odd(const Vec2& p, const IdealCurve& c) {
    int crossings = 0;
    const int nseg = c.closed ? c.size() : c.size() - 1;
    for (int i = 0; i < nseg; ++i) {
        const Vec2& a = c.at(i);
        const Vec2& b = c.at(i + 1);
        if ((a.x() > p.x()) == (b.x() > p.x())) continue;
        const double u = (p.x() - a.x()) / (b.x() - a.x());
        if (a.y() + u * (b.y() - a.y()) > p.y()) ++crossings;
    }
    return crossings % 2 == 1;
}

inline bool point_in_closed_curve(const Vec2& p, const IdealCurve& c) {
    return ray_crossing_parity_odd(p, c);
}

// ---------------------------------------------------------------------------
// Curve sets and region decomposition.

struct IdealCurveSet {
    std::vector<IdealCurve> components;

    int count() const { return static_cast<int>(components.size()); }

    /// Minimum pairwise separation; 0 if any pair of components intersects.
    double min_separation() const {
        double d = std::numeric_limits<double>::infinity();
        for (int i = 0; i < count(); ++i)
            for (int j = i + 1; j < count(); ++j)
                d = std::min(d, curves_min_distance(components[i], components[j]));
        return d;
    }

    void validate() const {
        for (const auto& c : components) {
            if (c.size() < (c.closed ? 3 : 2))
                throw std::invalid_argument("curve with too few samples");
            if (curve_self_intersects(c)) throw std::invalid_argument("self-intersecting component");
        }
        if (count() > 1 && min_separation() <= 0.0)
            throw std::invalid_argument("intersecting components");
    }

    NearestHit nearest(const Vec2& p) const {
        NearestHit best;
        for (int ci = 0; ci < count(); ++ci) {
            NearestHit h = nearest_on_curve(p, components[ci]);
            if (h.distance < best.distance) { best = h; best.component = ci; }
        }
        return best;
    }

    double distance(const Vec2& p) const { return nearest(p).distance; }
};

/// Fix the winding of every component so that X+ sits to the left: components
/// at even nesting depth run CCW, odd-depth (hole) components run CW. Needed
/// for curve systems assembled from marching-squares output or mixed sources.
inline void orient_by_nesting(IdealCurveSet& set) {
    const int n = set.count();
    for (int i = 0; i < n; ++i) {
        IdealCurve& c = set.components[i];
        if (!c.closed || c.size() < 3) continue;
        int depth = 0;
        for (int j = 0; j < n; ++j)
            if (j != i && set.components[j].closed &&
                point_in_closed_curve(c.samples[0], set.components[j]))
                ++depth;
        const bool want_ccw = depth % 2 == 0;
        if ((c.signed_area() > 0.0) != want_ccw) std::reverse(c.samples.begin(), c.samples.end());
        c.orientation = want_ccw ? Orientation::CCW : Orientation::CW;
    }
}

enum class RegionSide { Plus, Minus };

/// Which side of the curve system a point lies on. The convention is that
/// X+ is the region to the left of each oriented component, determined here
/// by the nearest segment; consistent for a valid two-colorable system.
inline RegionSide classify_point(const IdealCurveSet& set, const Vec2& p) {
    const NearestHit h = set.nearest(p);
    if (h.component < 0) throw std::invalid_argument("classify_point: empty curve set");
    const IdealCurve& c = set.components[h.component];
    const Vec2 a = c.at(h.segment);
    const Vec2 b = c.at(h.segment + 1);
    const Vec2 t = b - a;
    const Vec2 r = p - h.point;
    const double cr = t.x() * r.y() - t.y() * r.x();
    return cr >= 0.0 ? RegionSide::Plus : RegionSide::Minus;
}

/// One of the two complementary regions, as the curve system plus a side tag.
struct RegionDescriptor {
    IdealCurveSet boundary;
    RegionSide side = RegionSide::Plus;

    bool contains(const Vec2& p) const { return classify_point(boundary, p) == side; }
};

inline std::pair<RegionDescriptor, RegionDescriptor> decompose_regions(const IdealCurveSet& set) {
    set.validate();
    return {RegionDescriptor{set, RegionSide::Plus}, RegionDescriptor{set, RegionSide::Minus}};
}

// ---------------------------------------------------------------------------
// Bridge arcs.

struct BridgeArc {
    IdealCurve arc;                   // open polyline
    int endpoint_components[2] = {-1, -1};
    RegionSide side = RegionSide::Plus;  // region containing the arc interior
};

struct BridgeValidation {
    bool endpoints_on_curve = false;
    bool interior_avoids_curve = false;
    bool orthogonal = false;
    bool single_region = false;
    double angle_error_deg = 0.0;     // worst deviation from 90 degrees
    int endpoint_components[2] = {-1, -1};
    RegionSide side = RegionSide::Plus;
    std::vector<std::string> violations;

    bool ok() const {
        return endpoints_on_curve && interior_avoids_curve && orthogonal && single_region;
    }
};

inline BridgeValidation validate_bridge(const IdealCurveSet& gamma, const BridgeArc& alpha,
                                        double angle_tol_deg = 1.0, double endpoint_tol = 1e-6) {
    BridgeValidation v;
    const IdealCurve& arc = alpha.arc;
    if (arc.closed || arc.size() < 3) {
        v.violations.push_back("bridge must be an open polyline with interior samples");
        return v;
    }
    const double scale = std::max(1.0, arc.length());

    const NearestHit h0 = gamma.nearest(arc.samples.front());
    const NearestHit h1 = gamma.nearest(arc.samples.back());
    v.endpoint_components[0] = h0.component;
    v.endpoint_components[1] = h1.component;
    v.endpoints_on_curve = h0.distance <= endpoint_tol * scale && h1.distance <= endpoint_tol * scale;
    if (!v.endpoints_on_curve) v.violations.push_back("endpoint not on curve system");

    // interior clearance: skip samples near the ends, whose distance to the
    // curve necessarily goes to zero
    const double clear_tol = 1e-3 * scale;
    v.interior_avoids_curve = true;
    double interior_margin = std::numeric_limits<double>::infinity();
    for (int i = 1; i + 1 < arc.size(); ++i) {
        const double to_end = std::min((arc.samples[i] - arc.samples.front()).norm(),
                                       (arc.samples[i] - arc.samples.back()).norm());
        if (to_end < 0.05 * scale) continue;
        interior_margin = std::min(interior_margin, gamma.distance(arc.samples[i]));
    }
    if (interior_margin <= clear_tol) {
        v.interior_avoids_curve = false;
        v.violations.push_back("arc interior touches the curve system");
    }

    auto end_angle_deg = [&](int end) {
        const NearestHit h = end == 0 ? h0 : h1;
        if (h.component < 0) return 90.0;
        const IdealCurve& c = gamma.components[h.component];
        // segment tangents are biased by half the vertex turn angle when the
        // hit is at a vertex; use the central-difference tangent there
        const Vec2 a = c.at(h.segment), b = c.at(h.segment + 1);
        const double seg_len = (b - a).norm();
        Vec2 ct;
        if ((h.point - a).norm() < 0.25 * seg_len)
            ct = c.tangent(h.segment);
        else if ((h.point - b).norm() < 0.25 * seg_len)
            ct = c.tangent(h.segment + 1);
        else
            ct = (b - a).normalized();
        const Vec2 at = end == 0 ? arc.tangent(0) : arc.tangent(arc.size() - 1);
        const double cosang = std::abs(ct.dot(at));
        return std::acos(std::clamp(cosang, 0.0, 1.0)) * 180.0 / M_PI;
    };
    const double a0 = end_angle_deg(0), a1 = end_angle_deg(1);
    v.angle_error_deg = std::max(std::abs(a0 - 90.0), std::abs(a1 - 90.0));
    v.orthogonal = v.angle_error_deg <= angle_tol_deg;
    if (!v.orthogonal) v.violations.push_back("bridge not orthogonal to the curve at an endpoint");

    // all interior samples away from the ends must lie in one region
    v.single_region = true;
    bool have_side = false;
    for (int i = 1; i + 1 < arc.size(); ++i) {
        const double to_end = std::min((arc.samples[i] - arc.samples.front()).norm(),
                                       (arc.samples[i] - arc.samples.back()).norm());
        if (to_end < 0.05 * scale) continue;
        const RegionSide s = classify_point(gamma, arc.samples[i]);
        if (!have_side) { v.side = s; have_side = true; }
        else if (s != v.side) { v.single_region = false; break; }
    }
    if (!v.single_region) v.violations.push_back("arc interior crosses between regions");
    return v;
}

// ---------------------------------------------------------------------------
// Linking and separation (boundary-at-infinity predicates).

enum class LinkingType { Disjoint, Nested, Linked };

inline LinkingType linking_test(const RegionDescriptor& omega1, const RegionDescriptor& omega2) {
    for (const auto& c1 : omega1.boundary.components)
        for (const auto& c2 : omega2.boundary.components)
            if (curves_intersect(c1, c2)) return LinkingType::Linked;

    auto boundary_inside = [](const RegionDescriptor& inner, const RegionDescriptor& outer) {
        for (const auto& c : inner.boundary.components)
            for (const Vec2& p : c.samples)
                if (!outer.contains(p)) return false;
        return true;
    };
    if (boundary_inside(omega1, omega2) || boundary_inside(omega2, omega1))
        return LinkingType::Nested;
    if (!boundary_inside(omega1, omega2) && !boundary_inside(omega2, omega1)) {
        // neither boundary enters the other region at all -> disjoint closures
        auto touches = [](const RegionDescriptor& a, const RegionDescriptor& b) {
            for (const auto& c : a.boundary.components)
                for (const Vec2& p : c.samples)
                    if (b.contains(p)) return true;
            return false;
        };
        if (!touches(omega1, omega2) && !touches(omega2, omega1)) return LinkingType::Disjoint;
    }
    return LinkingType::Linked;
}

namespace detail {

/// Boundary chart point -> unit vector on the sphere at infinity (ball model).
inline Vec3 boundary_to_sphere(const Vec2& p) {
    const double d = p.squaredNorm() + 1.0;
    return Vec3(2.0 * p.x() / d, 2.0 * p.y() / d, (p.squaredNorm() - 1.0) / d);
}

/// Inverse chart: sphere point -> plane; undefined at the north pole.
inline Vec2 sphere_to_boundary(const Vec3& s) {
    if (1.0 - s.z() < 1e-12) throw std::invalid_argument("point at infinity has no chart image");
    return Vec2(s.x() / (1.0 - s.z()), s.y() / (1.0 - s.z()));
}

}  // namespace detail

/// Search for a round circle separating the two curve systems on the sphere
/// at infinity. A round circle is a plane section {n.x = c} of the sphere,
/// so the search is for a linearly separating plane over the lifted samples.
/// Absence of a result is inconclusive, not a proof of non-separability.
inline std::optional<IdealCurve> separation_curve(const IdealCurveSet& gamma1,
                                                  const IdealCurveSet& gamma2,
                                                  int out_samples = 256) {
    std::vector<Vec3> A, B;
    for (const auto& c : gamma1.components)
        for (const Vec2& p : c.samples) A.push_back(detail::boundary_to_sphere(p));
    for (const auto& c : gamma2.components)
        for (const Vec2& p : c.samples) B.push_back(detail::boundary_to_sphere(p));
    if (A.empty() || B.empty()) return std::nullopt;

    Vec3 ca = Vec3::Zero(), cb = Vec3::Zero();
    for (const Vec3& p : A) ca += p;
    for (const Vec3& p : B) cb += p;
    ca /= A.size();
    cb /= B.size();

    std::vector<Vec3> candidates = {(ca - cb).normalized(), Vec3(1, 0, 0), Vec3(0, 1, 0),
                                    Vec3(0, 0, 1), ca.normalized(), cb.normalized()};
    std::mt19937 gen(7);
    std::normal_distribution<double> nd;
    for (int i = 0; i < 64; ++i) candidates.push_back(Vec3(nd(gen), nd(gen), nd(gen)).normalized());

    Vec3 best_n;
    double best_margin = 0.0, best_c = 0.0;
    for (const Vec3& n : candidates) {
        if (!std::isfinite(n.x()) || n.norm() < 0.5) continue;
        double minA = std::numeric_limits<double>::infinity(), maxA = -minA;
        double minB = minA, maxB = -minA;
        for (const Vec3& p : A) { minA = std::min(minA, n.dot(p)); maxA = std::max(maxA, n.dot(p)); }
        for (const Vec3& p : B) { minB = std::min(minB, n.dot(p)); maxB = std::max(maxB, n.dot(p)); }
        if (minA - maxB > best_margin) {
            best_margin = minA - maxB;
            best_n = n;
            best_c = 0.5 * (minA + maxB);
        }
        if (minB - maxA > best_margin) {
            best_margin = minB - maxA;
            best_n = n;
            best_c = 0.5 * (minB + maxA);
        }
    }
    if (best_margin <= 1e-9) return std::nullopt;
    if (std::abs(best_c) >= 1.0) return std::nullopt;  // plane misses the sphere

    // plane section -> circle samples -> back to the chart
    Vec3 e1 = best_n.unitOrthogonal();
    Vec3 e2 = best_n.cross(e1);
    const double r = std::sqrt(1.0 - best_c * best_c);
    IdealCurve beta;
    beta.closed = true;
    bool hits_infinity = false;
    for (int i = 0; i < out_samples; ++i) {
        const double th = 2.0 * M_PI * i / out_samples;
        const Vec3 s = best_c * best_n + r * (std::cos(th) * e1 + std::sin(th) * e2);
        if (1.0 - s.z() < 1e-9) { hits_infinity = true; continue; }
        beta.samples.push_back(detail::sphere_to_boundary(s));
    }
    beta.through_infinity = hits_infinity;
    if (hits_infinity) beta.closed = false;
    if (beta.size() < 3) return std::nullopt;
    return beta;
}

}  // namespace hsurf

#endif  // HSURF_CURVES_HPP
