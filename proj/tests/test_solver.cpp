#include <catch2/catch_amalgamated.hpp>

#include <hsurf/solver.hpp>

using namespace hsurf;

namespace {

IdealCurveSet circle_set(const Vec2& c, double r) {
    IdealCurveSet g;
    g.components.push_back(make_circle(c, r, 256));
    return g;
}

TruncatedMesh truncated_cap_mesh(double r, double H, double z_cut, int n_theta = 96,
                                 int n_phi = 224) {
    const double beta = H / std::sqrt(1.0 - H * H);
    return mesh_cap(cap_through_ring(Vec2(0, 0), r + z_cut * beta, z_cut, H), z_cut, n_theta,
                    n_phi);
}

double worst_angle_error_deg(const SolveResult& r) {
    double worst = 0.0;
    for (const auto& s : r.boundary_angle_stats) worst = std::max(worst, s.error_deg());
    return worst;
}

}  // namespace

TEST_CASE("lift_boundary: offset z H / sqrt(1 - H^2) into X-", "[solver]") {
    IdealCurveSet g = circle_set(Vec2(0, 0), 1.0);

    // H = 0: no offset, just raised to z_cut
    LiftedBoundary flat = lift_boundary(g, 0.0, 0.05);
    REQUIRE(flat.rings.size() == 1);
    for (const Vec3& p : flat.rings[0]) {
        REQUIRE(p.z() == Catch::Approx(0.05).margin(1e-15));
        REQUIRE(p.head<2>().norm() == Catch::Approx(1.0).margin(1e-9));
    }

    // H = 0.5, r = 1, z_cut = 0.05: lifted radius 1.028868 (outward is the
    // right normal of a CCW circle)
    LiftedBoundary lift = lift_boundary(g, 0.5, 0.05);
    for (const Vec3& p : lift.rings[0])
        REQUIRE(p.head<2>().norm() == Catch::Approx(1.028868).margin(1e-5));

    REQUIRE_THROWS_AS(lift_boundary(g, 1.0, 0.05), std::invalid_argument);
    REQUIRE_THROWS_AS(lift_boundary(g, -0.1, 0.05), std::invalid_argument);
    REQUIRE_THROWS_AS(lift_boundary(g, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("cap_through_ring passes through the given ring", "[solver][analytic]") {
    for (double H : {0.0, 0.25, 0.6}) {
        const double ring = 1.3, z = 0.07;
        EquidistantCap cap = cap_through_ring(Vec2(0.4, -0.2), ring, z, H);
        // sphere center sits at height a; its cross-section at height z must
        // have radius `ring`
        const double cross = std::sqrt(cap.R * cap.R - (z - cap.a) * (z - cap.a));
        REQUIRE(cross == Catch::Approx(ring).margin(1e-12));
        REQUIRE(cap.a / cap.R == Catch::Approx(H).margin(1e-12));
    }
    // H = 0 reduces to the geodesic hemisphere of radius sqrt(ring^2 + z^2)
    EquidistantCap hemi = cap_through_ring(Vec2(0, 0), 1.0, 0.1, 0.0);
    REQUIRE(hemi.R == Catch::Approx(std::sqrt(1.01)).margin(1e-12));
    REQUIRE_THROWS_AS(cap_through_ring(Vec2(0, 0), 1.0, 0.1, 1.0), std::invalid_argument);
}

TEST_CASE("round-circle solves recover the truncated cap", "[solver]") {
    SolverConfig cfg;
    for (double H : {0.0, 0.5}) {
        SolveResult r = solve_plateau(circle_set(Vec2(0, 0), 1.0), H, std::nullopt, cfg);
        CAPTURE(H, r.max_residual, r.iterations);
        REQUIRE(r.converged);
        REQUIRE(r.max_residual <= 0.02);
        REQUIRE(worst_angle_error_deg(r) <= 1.0);
        TruncatedMesh ref = truncated_cap_mesh(1.0, H, cfg.z_cut);
        REQUIRE(mesh_hausdorff_hyp(r.mesh, ref) <= 1e-2);
    }
}

TEST_CASE("residual target halves under grid refinement", "[solver]") {
    SolverConfig fine;
    fine.grid_h = 0.025;
    fine.residual_target = 0.01;
    SolveResult r = solve_plateau(circle_set(Vec2(0, 0), 1.0), 0.5, std::nullopt, fine);
    REQUIRE(r.converged);
    REQUIRE(r.max_residual <= 0.01);
    TruncatedMesh ref = truncated_cap_mesh(1.0, 0.5, fine.z_cut);
    REQUIRE(mesh_hausdorff_hyp(r.mesh, ref) <= 5e-3);
}

TEST_CASE("perturbed cap flows back to the solution", "[solver]") {
    SolverConfig cfg;
    cfg.max_iterations = 3000;
    cfg.remesh_every = 25;  // the perturbation skews the polar fan
    TruncatedMesh m = truncated_cap_mesh(1.0, 0.5, cfg.z_cut, 48, 112);
    const TruncatedMesh exact = m;
    CurvatureField f = mean_curvature(exact);
    double zmax = 0.0;
    for (const Vec3& p : exact.vertices) zmax = std::max(zmax, p.z());
    std::set<int> ring;
    for (const auto& r : m.boundary_rings)
        for (int v : r) ring.insert(v);
    for (int i = 0; i < m.vcount(); ++i) {
        if (ring.count(i)) continue;
        const Vec3& p = exact.vertices[i];
        const double taper = 1.0 - std::pow(p.z() / zmax, 4);
        const double bump = std::sin(2.5 * p.x()) * std::cos(1.5 * p.y()) * taper;
        m.vertices[i] += 0.02 * bump * f.normal[i];
    }
    SolveResult r = solve_plateau_mesh(m, 0.5, cfg);
    CAPTURE(r.max_residual, r.iterations);
    REQUIRE(r.converged);
    REQUIRE(mesh_hausdorff_hyp(r.mesh, exact) <= 1e-2);
}

TEST_CASE("refine_mesh splits interior edges and keeps the topology", "[solver]") {
    TruncatedMesh m = truncated_cap_mesh(1.0, 0.0, 0.05, 24, 56);
    MeshTopologyReport before = topology_report(m);
    TruncatedMesh fine = refine_mesh(m);
    MeshTopologyReport after = topology_report(fine);
    REQUIRE(fine.vcount() > 3 * m.vcount());
    REQUIRE(after.euler_characteristic == before.euler_characteristic);
    REQUIRE(after.genus == before.genus);
    REQUIRE(after.boundary_count == before.boundary_count);
    CAPTURE(validate_mesh(fine).violations);
    REQUIRE(validate_mesh(fine).ok());
}

TEST_CASE("first variation matches the finite difference off equilibrium", "[solver]") {
    SolverConfig cfg;
    cfg.max_iterations = 2000;
    SolveResult r = solve_plateau(circle_set(Vec2(0, 0), 1.0), 0.3, std::nullopt, cfg);
    REQUIRE(r.converged);
    // the identity is degenerate at equilibrium (both sides ~ 0), so evaluate
    // the H = 0.3 shape against other curvature targets
    REQUIRE(variation_check(r.mesh, 0.0, 10) <= 0.05);
    REQUIRE(variation_check(r.mesh, 0.15, 10) <= 0.05);
}

TEST_CASE("barrier sandwich pins the solve onto the exact cap", "[solver]") {
    SolverConfig cfg;
    cfg.barrier_pair =
        BarrierPair{cap_for_circle(Vec2(0, 0), 1.0, 0.45), cap_for_circle(Vec2(0, 0), 1.0, 0.55)};
    SolveResult r = solve_plateau(circle_set(Vec2(0, 0), 1.0), 0.5, std::nullopt, cfg);
    REQUIRE(r.converged);
    const EquidistantCap exact = cap_for_circle(Vec2(0, 0), 1.0, 0.5);
    double worst = 0.0;
    for (const Vec3& p : r.mesh.vertices)
        worst = std::max(worst, std::abs((p - Vec3(0, 0, exact.a)).norm() - exact.R));
    REQUIRE(worst <= 5e-3);
}

TEST_CASE("tunnel obstacle keeps the surface outside", "[solver]") {
    SolverConfig cfg;
    std::vector<ObstacleRegion> obs = {HalfCylinderObstacle{Vec2(-0.5, 0), Vec2(0.5, 0), 0.3}};
    SolveResult r = solve_with_obstacle(circle_set(Vec2(0, 0), 1.0), 0.0, obs, cfg);
    REQUIRE(r.converged);
    for (const Vec3& p : r.mesh.vertices) REQUIRE_FALSE(detail::obstacle_contains(obs[0], p));
}

TEST_CASE("sphere obstacle deforms the dome without penetration", "[solver]") {
    SolverConfig cfg;
    std::vector<ObstacleRegion> obs = {SphereObstacle{Vec3(0, 0, 0.9), 0.3}};
    SolveResult r = solve_with_obstacle(circle_set(Vec2(0, 0), 1.0), 0.0, obs, cfg);
    CAPTURE(r.max_residual, r.obstacle_contacts);
    REQUIRE(r.converged);
    REQUIRE(r.obstacle_contacts > 0);  // the hemisphere apex must rest on it
    for (const Vec3& p : r.mesh.vertices) REQUIRE_FALSE(detail::obstacle_contains(obs[0], p));
}

TEST_CASE("template_mesh realizes the requested topology", "[solver]") {
    IdealCurveSet one = circle_set(Vec2(0, 0), 1.0);
    IdealCurveSet two = circle_set(Vec2(-1.5, 0), 0.8);
    two.components.push_back(make_circle(Vec2(1.5, 0), 0.8, 256));

    MeshTopologyReport disk = topology_report(template_mesh(one, 0.0, 0.05, 0.06));
    REQUIRE(disk.euler_characteristic == 1);
    REQUIRE(disk.genus == 0);
    REQUIRE(disk.boundary_count == 1);

    // two components are tube-joined into an annulus
    MeshTopologyReport ann = topology_report(template_mesh(two, 0.0, 0.05, 0.06));
    REQUIRE(ann.euler_characteristic == 0);
    REQUIRE(ann.genus == 0);
    REQUIRE(ann.boundary_count == 2);

    for (int g : {1, 2}) {
        MeshTopologyReport rep = topology_report(template_mesh(one, 0.0, 0.05, 0.06, g));
        REQUIRE(rep.euler_characteristic == 1 - 2 * g);
        REQUIRE(rep.genus == g);
        REQUIRE(rep.boundary_count == 1);
    }
}

TEST_CASE("continuation: splitting bridge gives an annulus with a clean collar", "[solver]") {
    SolverConfig cfg;
    cfg.grid_h = 0.06;
    cfg.max_iterations = 3000;
    IdealCurveSet g = circle_set(Vec2(0, 0), 1.0);
    SolveResult base = solve_plateau(g, 0.0, std::nullopt, cfg);
    REQUIRE(base.converged);

    IdealCurve arc;
    arc.closed = false;
    for (int i = 0; i <= 200; ++i) arc.samples.emplace_back(-1.0 + 2.0 * i / 200, 0.0);
    FoliationFamily fol = build_foliation(g, BridgeArc{arc}, 0.3, 0.3);
    ContinuationResult cr = continuation_bridge(base, fol, 0.0, cfg);
    CAPTURE(cr.failures);
    REQUIRE(cr.ok);
    REQUIRE(cr.collar_height > 0.0);
    MeshTopologyReport top = topology_report(cr.solve.mesh);
    REQUIRE(top.euler_characteristic == 0);
    REQUIRE(top.genus == 0);
    REQUIRE(top.boundary_count == 2);
    // accepted level: every scanned slab below the collar is genus-free
    for (double a = 1.5 * cr.solve.mesh.z_cut; a <= cr.collar_height; a *= 1.5)
        REQUIRE(genus_in_slab(cr.solve.mesh, a) == 0);
}

TEST_CASE("continuation: merging bridge joins two disks into one", "[solver]") {
    SolverConfig cfg;
    cfg.grid_h = 0.06;
    cfg.max_iterations = 3000;
    IdealCurveSet g = circle_set(Vec2(-1.5, 0), 0.8);
    g.components.push_back(make_circle(Vec2(1.5, 0), 0.8, 256));
    SolveResult base = solve_plateau(g, 0.0, std::nullopt, cfg);
    REQUIRE(base.converged);
    REQUIRE(topology_report(base.mesh).euler_characteristic == 2);

    IdealCurve arc;
    arc.closed = false;
    for (int i = 0; i <= 200; ++i) arc.samples.emplace_back(-0.7 + 1.4 * i / 200, 0.0);
    REQUIRE(component_count_rule(g, BridgeArc{arc}) == 1);
    FoliationFamily fol = build_foliation(g, BridgeArc{arc}, 0.3, 0.3);
    ContinuationResult cr = continuation_bridge(base, fol, 0.0, cfg);
    CAPTURE(cr.failures);
    REQUIRE(cr.ok);
    MeshTopologyReport top = topology_report(cr.solve.mesh);
    REQUIRE(top.euler_characteristic == 1);
    REQUIRE(top.genus == 0);
    REQUIRE(top.boundary_count == 1);
}

TEST_CASE("disjointness: nested hemispheres are separated by ln(r2/r1)", "[solver]") {
    SolverConfig cfg;
    SolveResult a = solve_plateau(circle_set(Vec2(0, 0), 1.0), 0.0, std::nullopt, cfg);
    SolverConfig big = cfg;
    big.z_cut = 0.4;
    big.grid_h = 0.5;
    SolveResult b = solve_plateau(circle_set(Vec2(0, 0), 8.0), 0.0, std::nullopt, big);
    DisjointnessReport rep = disjointness_check(a, b);
    REQUIRE(rep.applicable);
    REQUIRE(rep.pass);
    REQUIRE(rep.min_distance == Catch::Approx(std::log(8.0)).margin(0.02));
    REQUIRE(rep.min_distance > 10.0 * rep.mean_edge);

    DisjointnessReport same = disjointness_check(a, a);
    REQUIRE_FALSE(same.applicable);
}

TEST_CASE("thickness of the concentric-circle family is near zero", "[solver]") {
    SolverConfig cfg;
    cfg.grid_h = 0.08;
    auto family = [](double t) { return circle_set(Vec2(0, 0), 1.0 + t); };
    // the transversal must cross every member: start inside the smallest dome
    ThicknessReport rep =
        measure_thickness(family, Vec3(0.9, 0, 0.02), Vec3(0, 0, 1.8), 0.0, 0.15, 0.3, 2, cfg);
    REQUIRE(rep.eta_length > 0.0);
    double total = 0.0;
    for (const auto& s : rep.samples) {
        CAPTURE(s.t, s.lambda);
        REQUIRE(std::isfinite(s.lambda));
        REQUIRE(s.lambda <= 2.0 * cfg.residual_target);
        total += s.lambda;
    }
    REQUIRE(rep.total == Catch::Approx(total).margin(1e-12));
    REQUIRE(rep.total < rep.eta_length);
}

TEST_CASE("pinned fundamental strip re-solves onto the extruded profile", "[solver]") {
    const double H = 0.6, eps = 0.0931;  // epsilon normalized so the apex is O(1)
    const double z_cut = 0.05, L = 2.0;
    const int nx = 40;
    // match the profile sampling to the extrusion step
    HStripProfile coarse = h_strip_profile(eps, H, 400);
    double arc = 0.0;
    for (size_t i = 1; i < coarse.samples.size(); ++i)
        arc += (coarse.samples[i] - coarse.samples[i - 1]).norm();
    const int np = std::max(8, static_cast<int>(std::lround(arc / (L / nx))));
    HStripProfile prof = h_strip_profile(eps, H, np);
    TruncatedMesh m = mesh_extruded_profile(prof.samples, 0.0, L, nx, z_cut);

    CurvatureField f = mean_curvature(m);
    double res_ext = 0.0;
    for (int i = 0; i < m.vcount(); ++i)
        if (f.interior[i]) res_ext = std::max(res_ext, std::abs(f.h_hyp[i] - H));
    REQUIRE(res_ext <= 0.02);

    const TruncatedMesh ref = m;
    std::set<int> ring;
    for (const auto& r : m.boundary_rings)
        for (int v : r) ring.insert(v);
    for (int i = 0; i < m.vcount(); ++i) {
        if (ring.count(i)) continue;
        const Vec3& p = ref.vertices[i];
        const double bump =
            std::sin(M_PI * p.x() / L) * std::sin(M_PI * (p.z() - z_cut) / prof.apex_height);
        m.vertices[i].y() += 0.02 * bump;
        m.vertices[i].z() += 0.02 * bump * std::cos(3.0 * p.x());
    }
    SolverConfig cfg;
    cfg.max_iterations = 3000;
    SolveResult r = solve_plateau_mesh(m, H, cfg);
    REQUIRE(r.converged);
    double dev = 0.0;
    for (const Vec3& p : r.mesh.vertices) {
        if (p.z() < 0.3 * prof.apex_height || p.x() < L / 3 || p.x() > 2 * L / 3) continue;
        dev = std::max(dev, point_mesh_distance_hyp(p, ref));
    }
    REQUIRE(dev <= 1e-2);
}

TEST_CASE("solve_plateau rejects H outside [0, 1)", "[solver]") {
    REQUIRE_THROWS_AS(solve_plateau(circle_set(Vec2(0, 0), 1.0), 1.0, std::nullopt, SolverConfig{}),
                      std::invalid_argument);
}
