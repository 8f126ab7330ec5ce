#ifndef HSURF_TEST_FIXTURES_HPP
#define HSURF_TEST_FIXTURES_HPP

#include <hsurf/mesh.hpp>

// Shared mesh fixtures for the test suites.
namespace hsurf::fixtures {

/// Flat unit square [0,1]^2 at constant height z, (n+1)^2 vertices, upward
/// orientation; ring declared from the induced boundary.
inline TruncatedMesh flat_square(double z, int n = 16) {
    TruncatedMesh m;
    m.z_cut = z;
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i) m.vertices.emplace_back(double(i) / n, double(j) / n, z);
    auto id = [n](int i, int j) { return j * (n + 1) + i; };
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            m.triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            m.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    m.boundary_rings = boundary_loops(m);
    m.ring_curve_tags.assign(m.boundary_rings.size(), -1);
    return m;
}

/// Patch of the sphere |p - center| = R from polar angle 0 (apex fan) down
/// to theta_max, oriented with normals away from the center.
inline TruncatedMesh sphere_patch(const Vec3& center, double R, double theta_max, int n_theta = 40,
                                  int n_phi = 80) {
    TruncatedMesh m;
    auto pt = [&](double th, double ph) -> Vec3 {
        return center + R * Vec3(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph),
                                 std::cos(th));
    };
    m.vertices.push_back(pt(0, 0));  // apex
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
    m.z_cut = center.z() + R * std::cos(theta_max);
    m.boundary_rings = boundary_loops(m);
    m.ring_curve_tags.assign(m.boundary_rings.size(), -1);
    return m;
}

/// Planar patch y = slope*z + offset over x in [x0,x1], z in [z0,z1],
/// oriented so the unit normal is (0, 1, -slope)/sqrt(1+slope^2).
inline TruncatedMesh tilted_patch(double slope, double offset, double x0, double x1, double z0,
                                  double z1, int n = 32) {
    TruncatedMesh m;
    m.z_cut = z0;
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i) {
            const double x = x0 + (x1 - x0) * i / n;
            const double z = z0 + (z1 - z0) * j / n;
            m.vertices.emplace_back(x, slope * z + offset, z);
        }
    auto id = [n](int i, int j) { return j * (n + 1) + i; };
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            m.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i + 1, j)});
            m.triangles.push_back({id(i, j), id(i, j + 1), id(i + 1, j + 1)});
        }
    m.boundary_rings = boundary_loops(m);
    m.ring_curve_tags.assign(m.boundary_rings.size(), -1);
    return m;
}

/// Vertical-axis torus centered at `center`, major radius R, minor radius r,
/// with the triangles in an (iu, iv) index window removed, leaving one
/// boundary ring (a torus with one boundary component, genus 1).
inline TruncatedMesh torus_with_hole(const Vec3& center, double R, double r, int nu = 48,
                                     int nv = 24) {
    TruncatedMesh m;
    for (int iu = 0; iu < nu; ++iu)
        for (int iv = 0; iv < nv; ++iv) {
            const double u = 2.0 * M_PI * iu / nu;
            const double v = 2.0 * M_PI * iv / nv;
            m.vertices.push_back(center + Vec3((R + r * std::cos(v)) * std::cos(u),
                                               (R + r * std::cos(v)) * std::sin(u),
                                               r * std::sin(v)));
        }
    auto id = [&](int iu, int iv) { return ((iu % nu + nu) % nu) * nv + ((iv % nv + nv) % nv); };
    for (int iu = 0; iu < nu; ++iu)
        for (int iv = 0; iv < nv; ++iv) {
            // remove a 2x2 quad patch at the bottom of the tube (v near 3pi/2)
            const bool cut = iu < 2 && std::abs(iv - (3 * nv) / 4) < 2;
            if (cut) continue;
            m.triangles.push_back({id(iu, iv), id(iu + 1, iv), id(iu + 1, iv + 1)});
            m.triangles.push_back({id(iu, iv), id(iu + 1, iv + 1), id(iu, iv + 1)});
        }
    m.z_cut = center.z() - r;
    m.boundary_rings = boundary_loops(m);
    m.ring_curve_tags.assign(m.boundary_rings.size(), -1);
    return m;
}

/// Disk with `holes` square holes: genus 0, holes+1 boundary rings.
inline TruncatedMesh holey_square(double z, int holes, int n = 24) {
    TruncatedMesh m;
    m.z_cut = z;
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i) m.vertices.emplace_back(double(i) / n, double(j) / n, z);
    auto id = [n](int i, int j) { return j * (n + 1) + i; };
    auto in_hole = [&](int i, int j) {
        for (int h = 0; h < holes; ++h) {
            const int ci = (n * (h + 1)) / (holes + 1);
            const int cj = n / 2;
            if (std::abs(i - ci) < n / 8 && std::abs(j - cj) < n / 8) return true;
        }
        return false;
    };
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            if (in_hole(i, j)) continue;
            m.triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            m.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    m.boundary_rings = boundary_loops(m);
    m.ring_curve_tags.assign(m.boundary_rings.size(), -1);
    return m;
}

}  // namespace hsurf::fixtures

#endif
