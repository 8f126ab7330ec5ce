#include <catch2/catch_amalgamated.hpp>

#include <hsurf/analytic.hpp>

using namespace hsurf;

namespace {

double max_interior_residual(const TruncatedMesh& m, double H_target) {
    CurvatureField f = mean_curvature(m);
    double worst = 0.0;
    for (int i = 0; i < m.vcount(); ++i)
        if (f.interior[i]) worst = std::max(worst, std::abs(f.h_hyp[i] - H_target));
    return worst;
}

}  // namespace

TEST_CASE("cap_for_circle solves a/R = H, R^2 - a^2 = rho^2", "[analytic]") {
    EquidistantCap hemi = cap_for_circle(Vec2(0, 0), 1.0, 0.0);
    REQUIRE(hemi.R == Catch::Approx(1.0).margin(1e-15));
    REQUIRE(hemi.a == 0.0);

    EquidistantCap cap = cap_for_circle(Vec2(0, 0), 1.0, 0.5);
    REQUIRE(cap.R == Catch::Approx(2.0 / std::sqrt(3.0)).margin(1e-12));
    REQUIRE(cap.a == Catch::Approx(1.0 / std::sqrt(3.0)).margin(1e-12));
    REQUIRE(cap.a / cap.R == Catch::Approx(0.5).margin(1e-9));
    REQUIRE(cap.R * cap.R - cap.a * cap.a == Catch::Approx(1.0).margin(1e-9));

    // contact angle of the sphere-plane intersection: cos(theta) = a/R = H
    REQUIRE(std::cos(cap.contact_angle()) == Catch::Approx(0.5).margin(1e-9));

    REQUIRE_THROWS_AS(cap_for_circle(Vec2(0, 0), 1.0, 1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(cap_for_circle(Vec2(0, 0), -1.0, 0.0), std::invalid_argument);
}

TEST_CASE("cap_for_circle is equivariant under translation and dilation", "[analytic][property]") {
    EquidistantCap base = cap_for_circle(Vec2(0, 0), 1.0, 0.3);
    EquidistantCap moved = cap_for_circle(Vec2(2, -1), 1.0, 0.3);
    REQUIRE(moved.R == Catch::Approx(base.R).margin(1e-14));
    REQUIRE(moved.a == Catch::Approx(base.a).margin(1e-14));
    for (double lambda : {0.4, 3.0}) {
        EquidistantCap big = cap_for_circle(Vec2(0, 0), lambda, 0.3);
        REQUIRE(big.R == Catch::Approx(lambda * base.R).margin(1e-12));
        REQUIRE(big.a == Catch::Approx(lambda * base.a).margin(1e-12));
    }
}

TEST_CASE("sampled cap meshes satisfy the CMC residual bound", "[analytic]") {
    EquidistantCap cap = cap_for_circle(Vec2(0, 0), 1.0, 0.5);
    TruncatedMesh m = mesh_cap(cap, 0.05, 48, 112);
    REQUIRE(max_interior_residual(m, 0.5) <= 0.02);
    CAPTURE(validate_mesh(m).violations);
    REQUIRE(validate_mesh(m).ok());

    // residual halves (at least shrinks well) under sampling refinement
    TruncatedMesh fine = mesh_cap(cap, 0.05, 96, 224);
    REQUIRE(max_interior_residual(fine, 0.5) < 0.6 * max_interior_residual(m, 0.5));
}

TEST_CASE("tilted_halfplane slope and residual", "[analytic]") {
    TiltedHalfPlaneSurf v = tilted_halfplane(Vec2(0, 0), Vec2(1, 0), 0.0);
    REQUIRE(v.slope() == 0.0);  // vertical geodesic half-plane

    TiltedHalfPlaneSurf hp = tilted_halfplane(Vec2(0, 0), Vec2(1, 0), 0.6);
    REQUIRE(hp.slope() == Catch::Approx(0.75).margin(1e-9));

    TruncatedMesh m = mesh_halfplane(hp, -1.0, 1.0, 0.2, 1.4, 48);
    REQUIRE(max_interior_residual(m, 0.6) <= 0.02);

    TruncatedMesh m0 = mesh_halfplane(v, -1.0, 1.0, 0.2, 1.4, 32);
    REQUIRE(max_interior_residual(m0, 0.0) <= 0.02);
}

TEST_CASE("h_strip_profile endpoints, symmetry, contact angle", "[analytic]") {
    for (double H : {0.0, 0.3, 0.6, -0.4}) {
        HStripProfile prof = h_strip_profile(1.0, H, 240);
        REQUIRE(prof.samples.front().x() == Catch::Approx(-1.0).margin(1e-8));
        REQUIRE(prof.samples.front().y() == Catch::Approx(0.0).margin(1e-12));
        REQUIRE(prof.samples.back().x() == Catch::Approx(1.0).margin(1e-8));
        // y-symmetry
        const int n = static_cast<int>(prof.samples.size());
        for (int i = 0; i < n; ++i) {
            REQUIRE(prof.samples[i].x() == Catch::Approx(-prof.samples[n - 1 - i].x()).margin(1e-8));
            REQUIRE(prof.samples[i].y() == Catch::Approx(prof.samples[n - 1 - i].y()).margin(1e-8));
        }
        // contact angle arccos(H) at the endpoints, within 1 degree
        REQUIRE(prof.endpoint_angle == Catch::Approx(std::acos(H)).margin(M_PI / 180.0));
    }
}

TEST_CASE("h_strip_profile scales linearly in epsilon", "[analytic][property]") {
    HStripProfile a = h_strip_profile(1.0, 0.4, 100);
    HStripProfile b = h_strip_profile(2.5, 0.4, 100);
    REQUIRE(b.apex_height == Catch::Approx(2.5 * a.apex_height).epsilon(1e-9));
}

TEST_CASE("extruded strip profile is CMC under the mesh oracle", "[analytic]") {
    for (double H : {0.0, 0.5}) {
        HStripProfile prof = h_strip_profile(1.0, H, 300);
        TruncatedMesh m = mesh_extruded_profile(prof.samples, 0.0, 2.0, 40, 0.05);
        REQUIRE(max_interior_residual(m, H) <= 0.02);
    }
}

TEST_CASE("extruded strip is invariant under x-translation", "[analytic][property]") {
    HStripProfile prof = h_strip_profile(1.0, 0.3, 200);
    TruncatedMesh m = mesh_extruded_profile(prof.samples, 0.0, 2.0, 40, 0.05);
    TruncatedMesh g = m;
    for (auto& p : g.vertices) p = apply_isometry(ParabolicX{1.7}, ModelPoint::uhs(p.x(), p.y(), p.z())).coords;
    REQUIRE(max_interior_residual(g, 0.3) == Catch::Approx(max_interior_residual(m, 0.3)).margin(1e-12));
    REQUIRE(hyperbolic_area(g) == Catch::Approx(hyperbolic_area(m)).margin(1e-12));
}

TEST_CASE("the half-circle profile is not a minimal strip", "[analytic]") {
    // the geodesic half-cylinder intuition fails: the extruded half-circle
    // has hyperbolic mean curvature -sin(tau)/2 pointwise, peaking at 1/2
    std::vector<Vec2> semicircle;
    for (int i = 0; i <= 400; ++i) {
        const double tau = M_PI * i / 400;
        semicircle.emplace_back(-std::cos(tau), std::sin(tau));
    }
    TruncatedMesh m = mesh_extruded_profile(semicircle, 0.0, 2.0, 40, 0.05);
    const double worst = max_interior_residual(m, 0.0);
    REQUIRE(worst > 0.4);
    REQUIRE(worst < 0.6);
}

TEST_CASE("circle_pair_separation", "[analytic]") {
    REQUIRE(circle_pair_separation(Vec2(0, 0), 1.0, Vec2(0, 0), 2.0)
            == Catch::Approx(std::log(2.0)).margin(1e-12));
    // invariance: offset nested pair keeps its inversive separation under dilation
    const double d1 = circle_pair_separation(Vec2(0.2, 0), 1.0, Vec2(0, 0), 3.0);
    const double d2 = circle_pair_separation(Vec2(0.4, 0), 2.0, Vec2(0, 0), 6.0);
    REQUIRE(d1 == Catch::Approx(d2).margin(1e-12));
    REQUIRE_THROWS_AS(circle_pair_separation(Vec2(0, 0), 1.0, Vec2(0, 0), 1.0),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(circle_pair_separation(Vec2(5, 0), 1.0, Vec2(0, 0), 1.0),
                      std::invalid_argument);
}

TEST_CASE("catenoid_shoot finds a minimal catenoid at small separation", "[analytic]") {
    CatenoidShootReport rep = catenoid_shoot(Vec2(0, 0), 1.0, Vec2(0, 0), 1.2, 0.0);
    REQUIRE(rep.status == CatenoidStatus::Found);
    const SphericalCatenoid& cat = *rep.surface;
    REQUIRE(std::log(cat.r_out / cat.r_in) == Catch::Approx(std::log(1.2)).margin(1e-6));

    // independent dense parameter scan for the matching apex parameter
    const double d = std::log(1.2);
    double best_u = 0.0, best_err = 1e9;
    for (int i = 0; i < 4000; ++i) {
        const double u = 0.01 + 0.5 * i / 4000.0;
        const double lr = hsurf::detail::catenoid_ln_ratio(u, 0.0);
        if (std::isfinite(lr) && std::abs(lr - d) < best_err && u < 1.0) {
            // ascending branch only
            best_err = std::abs(lr - d);
            best_u = u;
        }
        if (std::isfinite(lr) && lr > d) break;  // passed the target on the way up
    }
    REQUIRE(cat.apex_ratio == Catch::Approx(best_u).margin(2e-3));
    REQUIRE(cat.neck_radius > 0.0);
    REQUIRE(cat.neck_radius <= cat.r_in + 1e-12);

    // the revolved profile is minimal under the mesh oracle
    TruncatedMesh m = mesh_catenoid(cat, Vec2(0, 0), 1.0, 0.02, 96);
    REQUIRE(max_interior_residual(m, 0.0) <= 0.02);
}

TEST_CASE("catenoid existence fails beyond the threshold", "[analytic]") {
    const double d0 = catenoid_existence_threshold(0.0);
    REQUIRE(d0 > 0.9);
    REQUIRE(d0 < 1.1);

    CatenoidShootReport far = catenoid_shoot(Vec2(0, 0), 1.0, Vec2(0, 0), std::exp(d0 + 0.1), 0.0);
    REQUIRE(far.status == CatenoidStatus::OutOfExistenceRange);
    CatenoidShootReport near = catenoid_shoot(Vec2(0, 0), 1.0, Vec2(0, 0), std::exp(d0 - 0.1), 0.0);
    REQUIRE(near.status == CatenoidStatus::Found);
}

TEST_CASE("catenoid existence is monotone in separation", "[analytic][property]") {
    bool seen_missing = false;
    for (double d = 0.2; d <= 1.4; d += 0.15) {
        const CatenoidShootReport rep = catenoid_shoot(Vec2(0, 0), 1.0, Vec2(0, 0), std::exp(d), 0.0);
        const bool found = rep.status == CatenoidStatus::Found;
        if (seen_missing) REQUIRE(!found);
        if (!found) seen_missing = true;
    }
    REQUIRE(seen_missing);  // the scan range does cross the threshold
}

TEST_CASE("skillet boundary profile values", "[analytic]") {
    REQUIRE(skillet_height(3.0) == 0.0);
    REQUIRE(skillet_height(-3.0) == 0.0);
    REQUIRE(skillet_height(2.0) == 0.0);
    REQUIRE(skillet_height(1.01) > 100.0);
    REQUIRE(skillet_height(-1.01) > 100.0);
    REQUIRE(std::isinf(skillet_height(0.5)));

    // convexity of each branch: nonnegative second differences
    const double h = 1e-3;
    for (double x = 1.02; x < 2.2; x += 0.01) {
        const double dd = skillet_height(x - h) - 2.0 * skillet_height(x) + skillet_height(x + h);
        REQUIRE(dd >= -1e-9);
    }
}

TEST_CASE("skillet boundary is star shaped about (0,-delta)", "[analytic]") {
    SkilletBoundary sk = skillet_boundary();
    REQUIRE(sk.curves.count() == 2);
    REQUIRE(sk.star_point.x() == 0.0);
    REQUIRE(sk.star_point.y() < 0.0);

    // 64 ray directions toward the finite part of the curve (avoiding the
    // escape directions through the ideal point at infinity)
    int tested = 0;
    for (int k = 0; k < 32; ++k) {
        for (double side : {+1.0, -1.0}) {
            const double alpha = (5.0 + 83.0 * k / 31.0) * M_PI / 180.0;  // from the +x axis
            const Vec2 dir(side * std::cos(alpha), std::sin(alpha));
            REQUIRE(ray_crossings(sk.curves, sk.star_point, dir) == 1);
            ++tested;
        }
    }
    REQUIRE(tested == 64);
}

TEST_CASE("skillet boundary rejects bad parameters", "[analytic]") {
    REQUIRE_THROWS_AS(skillet_boundary(2.0, 1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(skillet_boundary(0.0, 1.0), std::invalid_argument);
}
