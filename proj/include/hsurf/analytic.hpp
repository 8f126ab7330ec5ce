#ifndef HSURF_ANALYTIC_HPP
#define HSURF_ANALYTIC_HPP

#include <hsurf/curves.hpp>
#include <hsurf/mesh.hpp>

#include <functional>
#include <optional>

// Model H-surfaces used as oracles, barriers and fixtures: equidistant caps,
// tilted half-planes, translation-invariant strips, rotational catenoids,
// and the skillet boundary data.
//
// Conventions (calibrated against the discrete estimator in mesh.hpp):
// a Euclidean-described surface with unit normal nu has hyperbolic mean
// curvature H = z*H_euc - nu_z, where H_euc is the average of principal
// curvatures, positive for a sphere with outward normal. Caps are oriented
// with normals away from the sphere center, giving H = +a/R.
namespace hsurf {

enum class AnalyticKind {
    GeodesicPlane,
    EquidistantCap,
    TiltedHalfPlane,
    HStrip,
    SphericalCatenoid,
    SkilletBoundaryData
};

// ---------------------------------------------------------------------------
// Equidistant caps.

struct EquidistantCap {
    Vec2 center;   // boundary circle center in {z=0}
    double rho;    // boundary circle radius
    double H;      // mean curvature, 0 <= H < 1 (hemisphere at 0)
    double R;      // Euclidean sphere radius
    double a;      // sphere center height, a = H R, R^2 - a^2 = rho^2

    double contact_angle() const { return std::acos(H); }
};

inline EquidistantCap cap_for_circle(const Vec2& center, double rho, double H) {
    if (H < 0.0 || H >= 1.0) throw std::invalid_argument("cap_for_circle: need 0 <= H < 1");
    if (rho <= 0.0) throw std::invalid_argument("cap_for_circle: need rho > 0");
    const double R = rho / std::sqrt(1.0 - H * H);
    return EquidistantCap{center, rho, H, R, H * R};
}

/// The cap whose cross-section at height z is the given circle. This is the
/// exact solution of the truncated problem when the pinned ring sits at
/// (ring_radius, z): the asymptotic radius picks up an O(z^2) correction over
/// the straight-boundary lift offset.
inline EquidistantCap cap_through_ring(const Vec2& center, double ring_radius, double z,
                                       double H) {
    if (H < 0.0 || H >= 1.0) throw std::invalid_argument("cap_through_ring: need 0 <= H < 1");
    const double beta = H / std::sqrt(1.0 - H * H);  // slope a / rho
    const double rho =
        -beta * z + std::sqrt(beta * beta * z * z + ring_radius * ring_radius + z * z);
    return cap_for_circle(center, rho, H);
}

/// Sampled cap mesh from the apex down to z_cut, normals away from the
/// sphere center (mean curvature +H = a/R).
inline TruncatedMesh mesh_cap(const EquidistantCap& cap, double z_cut, int n_theta = 40,
                              int n_phi = 96) {
    if (z_cut <= 0.0 || z_cut >= cap.a + cap.R)
        throw std::invalid_argument("mesh_cap: z_cut outside cap height range");
    const Vec3 c3(cap.center.x(), cap.center.y(), cap.a);
    const double theta_max = std::acos((z_cut - cap.a) / cap.R);
    TruncatedMesh m;
    auto pt = [&](double th, double ph) -> Vec3 {
        return c3 + cap.R * Vec3(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph),
                                 std::cos(th));
    };
    // uniform polar grid: the azimuthal slivers near the apex look bad but
    // their estimator errors cancel by symmetry, which keeps the pointwise
    // residual far below what any irregular stitched tessellation achieves
    m.vertices.push_back(pt(0, 0));
    for (int it = 1; it <= n_theta; ++it)
        for (int ip = 0; ip < n_phi; ++ip)
            m.vertices.push_back(pt(theta_max * it / n_theta, 2.0 * M_PI * ip / n_phi));
    auto id = [&](int it, int ip) { return 1 + (it - 1) * n_phi + ((ip % n_phi + n_phi) % n_phi); };
    for (int ip = 0; ip < n_phi; ++ip) m.triangles.push_back({0, id(1, ip), id(1, ip + 1)});
    for (int it = 1; it < n_theta; ++it)
        for (int ip = 0; ip < n_phi; ++ip) {
            m.triangles.push_back({id(it, ip), id(it + 1, ip), id(it + 1, ip + 1)});
            m.triangles.push_back({id(it, ip), id(it + 1, ip + 1), id(it, ip + 1)});
        }
    for (int ip = 0; ip < n_phi; ++ip) {
        Vec3& p = m.vertices[id(n_theta, ip)];
        p.z() = z_cut;  // squash ring rounding noise
    }
    m.z_cut = z_cut;
    m.boundary_rings = boundary_loops(m);
    m.ring_curve_tags.assign(m.boundary_rings.size(), -1);
    return m;
}

// ---------------------------------------------------------------------------
// Tilted half-planes.

struct TiltedHalfPlaneSurf {
    Vec2 base_point;      // point on the base line in {z=0}
    Vec2 direction;       // unit direction of the base line
    double H = 0.0;       // |H| < 1
    int side = +1;        // +1: tilt toward the left of `direction`

    double slope() const { return H / std::sqrt(1.0 - H * H); }
};

inline TiltedHalfPlaneSurf tilted_halfplane(const Vec2& base_point, const Vec2& direction,
                                            double H, int side = +1) {
    if (std::abs(H) >= 1.0) throw std::invalid_argument("tilted_halfplane: need |H| < 1");
    if (direction.norm() == 0.0) throw std::invalid_argument("tilted_halfplane: zero direction");
    return TiltedHalfPlaneSurf{base_point, direction.normalized(), H, side >= 0 ? +1 : -1};
}

/// Point at (arclength s along the line, height z). The plane is
/// { base + s d + z (slope * side * n_left + e_z) } with n_left the left
/// normal of the base direction.
inline Vec3 halfplane_point(const TiltedHalfPlaneSurf& hp, double s, double z) {
    const Vec2 n_left(-hp.direction.y(), hp.direction.x());
    const Vec2 xy = hp.base_point + s * hp.direction + z * hp.slope() * hp.side * n_left;
    return Vec3(xy.x(), xy.y(), z);
}

inline TruncatedMesh mesh_halfplane(const TiltedHalfPlaneSurf& hp, double s0, double s1, double z0,
                                    double z1, int n = 48) {
    TruncatedMesh m;
    m.z_cut = z0;
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i)
            m.vertices.push_back(
                halfplane_point(hp, s0 + (s1 - s0) * i / n, z0 + (z1 - z0) * j / n));
    auto id = [n](int i, int j) { return j * (n + 1) + i; };
    // winding chosen so the normal tilts away from the surface side (+H)
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            if (hp.side > 0) {
                m.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i + 1, j)});
                m.triangles.push_back({id(i, j), id(i, j + 1), id(i + 1, j + 1)});
            } else {
                m.triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
                m.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
            }
        }
    m.boundary_rings = boundary_loops(m);
    m.ring_curve_tags.assign(m.boundary_rings.size(), -1);
    return m;
}

// ---------------------------------------------------------------------------
// Profile ODEs. State: position (q, z) in a vertical plane (q = y for the
// strip, q = r for the catenoid) plus tangent angle phi; arclength RK4 with
// steps shrinking near the singular boundary z = 0.
//
// With the left normal n = (-sin phi, cos phi) of the traversal, the CMC
// condition reads  -z*(phi' + rot*sin(phi)/q)/2 - cos(phi) = H, where rot is
// 1 for surfaces of revolution and 0 for extrusions.

namespace detail {

struct ProfileState {
    double q, z, phi;
};

struct ProfileResult {
    std::vector<Vec2> samples;  // (q, z), traversal order
    double q_end = 0.0;         // extrapolated landing q at z = 0
    double phi_end = 0.0;
    bool ok = false;
};

inline ProfileResult integrate_profile(double q0, double z0, double phi0, double H, int rot,
                                       double dir, double z_stop, int max_steps = 2000000) {
    ProfileResult out;
    ProfileState s{q0, z0, phi0};
    auto rhs = [&](const ProfileState& x) -> ProfileState {
        const double dphi = -(rot ? std::sin(x.phi) / x.q : 0.0) - 2.0 * (H + std::cos(x.phi)) / x.z;
        return {dir * std::cos(x.phi), dir * std::sin(x.phi), dir * dphi};
    };
    out.samples.emplace_back(s.q, s.z);
    for (int it = 0; it < max_steps; ++it) {
        if (s.z <= z_stop) break;
        if (rot && s.q <= z_stop) return out;  // hit the axis: shooting failure
        // fine steps: resampled profiles interpolate this polyline linearly,
        // so chord sag must stay well below the curvature signal
        double ds = 0.002 * std::min(1.0 + z0, std::min(s.z, rot ? s.q : s.z));
        ds = std::min(ds, 0.4 * s.z);
        const ProfileState k1 = rhs(s);
        const ProfileState s2{s.q + 0.5 * ds * k1.q, s.z + 0.5 * ds * k1.z, s.phi + 0.5 * ds * k1.phi};
        const ProfileState k2 = rhs(s2);
        const ProfileState s3{s.q + 0.5 * ds * k2.q, s.z + 0.5 * ds * k2.z, s.phi + 0.5 * ds * k2.phi};
        const ProfileState k3 = rhs(s3);
        const ProfileState s4{s.q + ds * k3.q, s.z + ds * k3.z, s.phi + ds * k3.phi};
        const ProfileState k4 = rhs(s4);
        s.q += ds * (k1.q + 2 * k2.q + 2 * k3.q + k4.q) / 6.0;
        s.z += ds * (k1.z + 2 * k2.z + 2 * k3.z + k4.z) / 6.0;
        s.phi += ds * (k1.phi + 2 * k2.phi + 2 * k3.phi + k4.phi) / 6.0;
        out.samples.emplace_back(s.q, s.z);
    }
    if (s.z > 10.0 * z_stop) return out;  // ran out of steps
    // extend along the tangent to z = 0 (regular endpoint, angle theta_H)
    if (std::abs(std::sin(s.phi)) < 1e-9) return out;
    out.q_end = s.q - s.z * std::cos(s.phi) / std::sin(s.phi);
    out.phi_end = s.phi;
    out.samples.emplace_back(out.q_end, 0.0);
    out.ok = true;
    return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// H-strips.

struct HStripProfile {
    double epsilon = 0.0;
    double H = 0.0;
    std::vector<Vec2> samples;  // (y, z) from (-epsilon, 0) to (epsilon, 0)
    double apex_height = 0.0;
    double endpoint_angle = 0.0;  // angle with the boundary plane, = theta_H
};

/// Profile of the translation-invariant CMC-H surface over the strip
/// |y| <= epsilon: integrate from the apex (0, h) with horizontal tangent
/// down to z = 0; the solution scales linearly, so one integration at h = 1
/// is rescaled to land at y = epsilon. Contact angle arccos(H) emerges from
/// regularity at z = 0 rather than being imposed.
inline HStripProfile h_strip_profile(double epsilon, double H, int n_samples = 200) {
    if (epsilon <= 0.0 || std::abs(H) >= 1.0)
        throw std::invalid_argument("h_strip_profile: need epsilon > 0, |H| < 1");
    detail::ProfileResult right = detail::integrate_profile(0.0, 1.0, 0.0, H, 0, +1.0, 1e-9);
    if (!right.ok || right.q_end <= 0.0)
        throw std::runtime_error("h_strip_profile: profile integration failed");
    const double scale = epsilon / right.q_end;

    // resample right half by arclength, mirror for the left half
    IdealCurve half;
    half.closed = false;
    for (const Vec2& p : right.samples) half.samples.push_back(scale * p);
    half = resample_by_arclength(half, std::max(4, n_samples / 2 + 1));

    HStripProfile out;
    out.epsilon = epsilon;
    out.H = H;
    out.apex_height = scale;
    for (int i = half.size() - 1; i > 0; --i)
        out.samples.emplace_back(-half.samples[i].x(), half.samples[i].y());
    out.samples.insert(out.samples.end(), half.samples.begin(), half.samples.end());
    // landing tangent angle is phi_end = -(pi - theta); contact angle with
    // the boundary plane is theta = pi - |phi_end|
    out.endpoint_angle = M_PI - std::abs(right.phi_end);
    return out;
}

/// Extrude a strip profile along x, oriented so the measured mean curvature
/// is +H (normal away from the region under the arch).
inline TruncatedMesh mesh_extruded_profile(const std::vector<Vec2>& profile, double x0, double x1,
                                           int nx, double z_cut) {
    // truncate the profile at z_cut
    std::vector<Vec2> prof;
    for (size_t i = 0; i < profile.size(); ++i) {
        const Vec2& p = profile[i];
        if (p.y() >= z_cut) {
            if (prof.empty() && i > 0) {
                const Vec2& q = profile[i - 1];
                const double u = (z_cut - q.y()) / (p.y() - q.y());
                prof.push_back(q + u * (p - q));
            }
            prof.push_back(p);
        } else if (!prof.empty() && i > 0 && profile[i - 1].y() >= z_cut) {
            const Vec2& q = profile[i - 1];
            const double u = (z_cut - q.y()) / (p.y() - q.y());
            prof.push_back(q + u * (p - q));
        }
    }
    if (prof.size() < 3) throw std::invalid_argument("mesh_extruded_profile: profile too short");
    prof.front().y() = z_cut;
    prof.back().y() = z_cut;

    TruncatedMesh m;
    m.z_cut = z_cut;
    const int np = static_cast<int>(prof.size());
    for (int i = 0; i <= nx; ++i)
        for (int j = 0; j < np; ++j)
            m.vertices.emplace_back(x0 + (x1 - x0) * i / nx, prof[j].x(), prof[j].y());
    auto id = [np](int i, int j) { return i * np + j; };
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j + 1 < np; ++j) {
            m.triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            m.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    m.boundary_rings = boundary_loops(m);
    m.ring_curve_tags.assign(m.boundary_rings.size(), -1);
    return m;
}

// ---------------------------------------------------------------------------
// Spherical catenoids.

enum class CatenoidStatus { Found, OutOfExistenceRange, ShootingFailure };

struct SphericalCatenoid {
    double H = 0.0;
    double separation = 0.0;          // invariant separation d of the circle pair
    double apex_ratio = 0.0;          // shooting parameter u = z_apex / r_apex
    double neck_radius = 0.0;         // min r on the normalized concentric profile
    std::vector<Vec2> profile;        // (r, z), inner rim to outer rim, frame where
                                      // the circles have radii r_in, r_out below
    double r_in = 0.0, r_out = 0.0;   // normalized asymptotic radii (ln ratio = d)
};

struct CatenoidShootReport {
    CatenoidStatus status = CatenoidStatus::ShootingFailure;
    std::optional<SphericalCatenoid> surface;
    double threshold_estimate = 0.0;  // max achievable separation on the scan grid
    std::string message;
};

/// Invariant separation of a nested disjoint circle pair: arccosh of the
/// inversive distance; equals ln(rho2/rho1) for concentric circles.
inline double circle_pair_separation(const Vec2& c1, double r1, const Vec2& c2, double r2) {
    if (r1 <= 0.0 || r2 <= 0.0) throw std::invalid_argument("circle pair: radii must be positive");
    const double delta = (r1 * r1 + r2 * r2 - (c1 - c2).squaredNorm()) / (2.0 * r1 * r2);
    if (delta <= 1.0 + 1e-12)
        throw std::invalid_argument("circle pair: circles must be strictly nested (disjoint)");
    return std::acosh(delta);
}

namespace detail {

/// Shoot both branches from the apex (r=1, z=u): forward lands at the outer
/// rim, backward at the inner rim. Returns ln(r_out/r_in), or NaN on failure.
inline double catenoid_ln_ratio(double u, double H, ProfileResult* fwd = nullptr,
                                ProfileResult* bwd = nullptr) {
    ProfileResult f = integrate_profile(1.0, u, 0.0, H, 1, +1.0, 1e-9);
    ProfileResult b = integrate_profile(1.0, u, 0.0, H, 1, -1.0, 1e-9);
    if (fwd) *fwd = f;
    if (bwd) *bwd = b;
    if (!f.ok || !b.ok || f.q_end <= 0.0 || b.q_end <= 0.0)
        return std::numeric_limits<double>::quiet_NaN();
    return std::log(f.q_end / b.q_end);
}

}  // namespace detail

/// Largest separation for which a rotational CMC-H catenoid exists, from a
/// scan over the apex parameter (n_scan log-spaced samples + golden refine).
inline double catenoid_existence_threshold(double H, int n_scan = 200) {
    double best = 0.0, best_u = 1.0;
    for (int i = 0; i < n_scan; ++i) {
        const double u = std::exp(-3.0 + 6.0 * i / (n_scan - 1));  // u in [e^-3, e^3]
        const double lr = detail::catenoid_ln_ratio(u, H);
        if (std::isfinite(lr) && lr > best) { best = lr; best_u = u; }
    }
    // golden-section refinement around the scan peak
    double lo = best_u / 1.5, hi = best_u * 1.5;
    for (int it = 0; it < 60; ++it) {
        const double m1 = lo + 0.381966 * (hi - lo);
        const double m2 = hi - 0.381966 * (hi - lo);
        const double f1 = detail::catenoid_ln_ratio(m1, H);
        const double f2 = detail::catenoid_ln_ratio(m2, H);
        if (!(f1 < f2)) hi = m2; else lo = m1;
    }
    return std::max(best, detail::catenoid_ln_ratio(0.5 * (lo + hi), H));
}

/// Rotational CMC-H annulus asymptotic to the given nested circle pair, by
/// bisection on the apex parameter along the fat-neck (small-u) branch.
inline CatenoidShootReport catenoid_shoot(const Vec2& c1, double r1, const Vec2& c2, double r2,
                                          double H) {
    CatenoidShootReport rep;
    if (H < 0.0 || H >= 1.0) throw std::invalid_argument("catenoid_shoot: need 0 <= H < 1");
    double d;
    try {
        d = circle_pair_separation(c1, r1, c2, r2);
    } catch (const std::invalid_argument& e) {
        rep.status = CatenoidStatus::ShootingFailure;
        rep.message = e.what();
        return rep;
    }

    // locate the peak of ln ratio over u
    const int n_scan = 160;
    double peak_u = 1.0, peak = -1.0;
    std::vector<std::pair<double, double>> scan;
    for (int i = 0; i < n_scan; ++i) {
        const double u = std::exp(-3.0 + 6.0 * i / (n_scan - 1));
        const double lr = detail::catenoid_ln_ratio(u, H);
        scan.emplace_back(u, lr);
        if (std::isfinite(lr) && lr > peak) { peak = lr; peak_u = u; }
    }
    rep.threshold_estimate = peak;
    if (!(peak > 0.0)) {
        rep.status = CatenoidStatus::ShootingFailure;
        rep.message = "profile integration failed across the scan grid";
        return rep;
    }
    if (d > peak) {
        rep.status = CatenoidStatus::OutOfExistenceRange;
        rep.message = "separation exceeds the existence threshold at this H";
        return rep;
    }

    // bisect on the ascending (small-u, fat-neck) branch: ln ratio - d = 0
    double lo = scan.front().first, hi = peak_u;
    for (auto& [u, lr] : scan) {
        if (u >= peak_u) break;
        if (std::isfinite(lr) && lr < d) lo = u;
    }
    for (int it = 0; it < 80; ++it) {
        const double mid = std::sqrt(lo * hi);
        const double lr = detail::catenoid_ln_ratio(mid, H);
        if (!std::isfinite(lr)) { lo = mid; continue; }
        if (lr < d) lo = mid; else hi = mid;
    }
    const double u_star = std::sqrt(lo * hi);
    detail::ProfileResult fwd, bwd;
    const double lr = detail::catenoid_ln_ratio(u_star, H, &fwd, &bwd);
    if (!std::isfinite(lr) || std::abs(lr - d) > 1e-6) {
        rep.status = CatenoidStatus::ShootingFailure;
        rep.message = "bisection failed to converge on the shooting parameter";
        return rep;
    }

    SphericalCatenoid cat;
    cat.H = H;
    cat.separation = d;
    cat.apex_ratio = u_star;
    cat.r_in = bwd.q_end;
    cat.r_out = fwd.q_end;
    cat.neck_radius = std::numeric_limits<double>::infinity();
    for (int i = static_cast<int>(bwd.samples.size()) - 1; i >= 0; --i)
        cat.profile.push_back(bwd.samples[i]);
    for (size_t i = 1; i < fwd.samples.size(); ++i) cat.profile.push_back(fwd.samples[i]);
    for (const Vec2& p : cat.profile) cat.neck_radius = std::min(cat.neck_radius, p.x());
    rep.status = CatenoidStatus::Found;
    rep.surface = std::move(cat);
    return rep;
}

/// Revolve a catenoid profile (normalized concentric frame) about the
/// vertical axis through `center`, truncated at z_cut.
inline TruncatedMesh mesh_catenoid(const SphericalCatenoid& cat, const Vec2& center, double scale,
                                   double z_cut, int n_phi = 96) {
    std::vector<Vec2> prof;  // (r, z), truncated at z_cut/scale in profile units
    const double zc = z_cut / scale;
    for (size_t i = 0; i < cat.profile.size(); ++i) {
        const Vec2& p = cat.profile[i];
        const bool in = p.y() >= zc;
        const bool prev_in = i > 0 && cat.profile[i - 1].y() >= zc;
        if (in && !prev_in && i > 0) {
            const Vec2& q = cat.profile[i - 1];
            prof.push_back(q + (zc - q.y()) / (p.y() - q.y()) * (p - q));
        }
        if (in) prof.push_back(p);
        if (!in && prev_in) {
            const Vec2& q = cat.profile[i - 1];
            prof.push_back(q + (zc - q.y()) / (p.y() - q.y()) * (p - q));
        }
    }
    if (prof.size() < 3) throw std::invalid_argument("mesh_catenoid: z_cut above the surface");
    prof.front().y() = zc;
    prof.back().y() = zc;

    TruncatedMesh m;
    m.z_cut = z_cut;
    const int np = static_cast<int>(prof.size());
    for (int j = 0; j < np; ++j)
        for (int ip = 0; ip < n_phi; ++ip) {
            const double ph = 2.0 * M_PI * ip / n_phi;
            m.vertices.emplace_back(center.x() + scale * prof[j].x() * std::cos(ph),
                                    center.y() + scale * prof[j].x() * std::sin(ph),
                                    scale * prof[j].y());
        }
    auto id = [&](int j, int ip) { return j * n_phi + ((ip % n_phi + n_phi) % n_phi); };
    for (int j = 0; j + 1 < np; ++j)
        for (int ip = 0; ip < n_phi; ++ip) {
            m.triangles.push_back({id(j, ip), id(j + 1, ip), id(j + 1, ip + 1)});
            m.triangles.push_back({id(j, ip), id(j + 1, ip + 1), id(j, ip + 1)});
        }
    m.boundary_rings = boundary_loops(m);
    m.ring_curve_tags.assign(m.boundary_rings.size(), -1);
    return m;
}

// ---------------------------------------------------------------------------
// Skillet boundary data.

struct SkilletBoundary {
    double width = 1.0;
    double cutoff = 2.0;
    Vec2 star_point = Vec2(0, -0.5);
    IdealCurveSet curves;  // two branches through infinity (right, left)
};

/// Profile height over |x| in (width, cutoff): smooth (C^3 at the cutoff),
/// convex, diverging at the width, identically zero beyond the cutoff.
inline double skillet_height(double x, double width = 1.0, double cutoff = 2.0) {
    const double s = std::abs(x);
    if (s >= cutoff) return 0.0;
    if (s <= width) return std::numeric_limits<double>::infinity();
    const double w = cutoff - width;
    const double t = cutoff - s;
    return 2.0 * t * t * t * t / (w * w * w * (s - width));
}

inline SkilletBoundary skillet_boundary(double width = 1.0, double cutoff = 2.0,
                                        double y_max = 300.0, double x_max = 8.0,
                                        int n_samples = 600) {
    if (!(cutoff > width && width > 0.0))
        throw std::invalid_argument("skillet_boundary: need cutoff > width > 0");
    SkilletBoundary sk;
    sk.width = width;
    sk.cutoff = cutoff;
    sk.star_point = Vec2(0.0, -0.5 * width);

    // right branch: descend from (x_div, y_max) along the graph, then flat to x_max
    auto branch = [&](double sign) {
        IdealCurve c;
        c.closed = false;
        c.through_infinity = true;
        // solve skillet_height(x) = y_max by bisection for the start abscissa
        double lo = width, hi = cutoff;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (skillet_height(mid, width, cutoff) > y_max ? lo : hi) = mid;
        }
        const double x_div = hi;
        const int n_graph = (3 * n_samples) / 4;
        for (int i = 0; i <= n_graph; ++i) {
            // geometric spacing concentrates samples near the divergence
            const double x = x_div + (cutoff - x_div) * (std::pow(50.0, double(i) / n_graph) - 1.0) / 49.0;
            c.samples.emplace_back(sign * x, skillet_height(x, width, cutoff));
        }
        for (int i = 1; i <= n_samples - n_graph; ++i)
            c.samples.emplace_back(sign * (cutoff + (x_max - cutoff) * i / (n_samples - n_graph)), 0.0);
        if (sign < 0) std::reverse(c.samples.begin(), c.samples.end());
        return c;
    };
    sk.curves.components.push_back(branch(+1.0));
    sk.curves.components.push_back(branch(-1.0));
    return sk;
}

/// Number of crossings of the ray p + t*dir (t > 0) with the curve system.
inline int ray_crossings(const IdealCurveSet& set, const Vec2& p, const Vec2& dir,
                         double t_max = 1e4) {
    const Vec2 far = p + t_max * dir.normalized();
    int crossings = 0;
    for (const auto& c : set.components) {
        const int nseg = c.closed ? c.size() : c.size() - 1;
        for (int i = 0; i < nseg; ++i)
            if (segments_intersect(p, far, c.at(i), c.at(i + 1))) ++crossings;
    }
    return crossings;
}

}  // namespace hsurf

#endif  // HSURF_ANALYTIC_HPP
