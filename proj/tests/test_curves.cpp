#include <catch2/catch_amalgamated.hpp>

#include <hsurf/curves.hpp>
#include <hsurf/foliation.hpp>

using namespace hsurf;

namespace {

// arc leaving a unit circle at (1,0) radially, running around the outside at
// radius 2, and coming back radially to (-1,0); orthogonal at both ends
IdealCurve exterior_return_arc(int n = 200) {
    IdealCurve arc;
    arc.closed = false;
    for (int i = 0; i <= n / 8; ++i)
        arc.samples.emplace_back(1.0 + i * (1.0 / (n / 8)), 0.0);
    for (int i = 1; i < n; ++i) {
        const double th = M_PI * i / n;
        arc.samples.emplace_back(2.0 * std::cos(th), 2.0 * std::sin(th));
    }
    for (int i = 0; i <= n / 8; ++i)
        arc.samples.emplace_back(-2.0 + i * (1.0 / (n / 8)), 0.0);
    return resample_by_arclength(arc, 400);
}

IdealCurve axis_arc(double x0, double x1, int n = 100) {
    IdealCurve arc;
    arc.closed = false;
    for (int i = 0; i <= n; ++i) arc.samples.emplace_back(x0 + (x1 - x0) * i / n, 0.0);
    return arc;
}

double set_min_distance(const IdealCurveSet& a, const IdealCurveSet& b) {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& ca : a.components)
        for (const auto& cb : b.components) d = std::min(d, curves_min_distance(ca, cb));
    return d;
}

std::vector<Vec2> all_samples(const IdealCurveSet& s) {
    std::vector<Vec2> out;
    for (const auto& c : s.components) out.insert(out.end(), c.samples.begin(), c.samples.end());
    return out;
}

}  // namespace

TEST_CASE("circle factory and basic curve ops", "[curves]") {
    IdealCurve c = make_circle(Vec2(1, 2), 3.0, 256);
    REQUIRE(c.length() == Catch::Approx(2 * M_PI * 3).epsilon(1e-3));
    REQUIRE(c.signed_area() == Catch::Approx(M_PI * 9).epsilon(1e-3));
    REQUIRE(!curve_self_intersects(c));
    IdealCurve cw = make_circle(Vec2(1, 2), 3.0, 256, Orientation::CW);
    REQUIRE(cw.signed_area() < 0);

    IdealCurve r = resample_by_arclength(c, 100);
    REQUIRE(r.size() == 100);
    double step0 = (r.at(1) - r.at(0)).norm();
    for (int i = 0; i < 100; ++i)
        REQUIRE((r.at(i + 1) - r.at(i)).norm() == Catch::Approx(step0).epsilon(1e-2));

    // tangent of a CCW circle is 90 degrees ahead of the radius direction
    Vec2 t0 = c.tangent(0);
    REQUIRE(t0.dot(Vec2(0, 1)) == Catch::Approx(1.0).margin(1e-3));
}

TEST_CASE("decompose_regions: one circle", "[curves]") {
    IdealCurveSet set;
    set.components.push_back(make_circle(Vec2(0, 0), 1.0));
    auto [plus, minus] = decompose_regions(set);
    // CCW circle: disk on the left -> X+
    REQUIRE(plus.contains(Vec2(0, 0)));
    REQUIRE(!plus.contains(Vec2(2, 0)));
    REQUIRE(minus.contains(Vec2(2, 0)));
    REQUIRE(point_in_closed_curve(Vec2(0.3, 0.4), set.components[0]));
    REQUIRE(!point_in_closed_curve(Vec2(1.3, 0.4), set.components[0]));
}

TEST_CASE("decompose_regions: nested circles against the parity oracle", "[curves]") {
    IdealCurveSet set;
    set.components.push_back(make_circle(Vec2(0, 0), 2.0, 256, Orientation::CCW));
    set.components.push_back(make_circle(Vec2(0, 0), 1.0, 256, Orientation::CW));
    auto [plus, minus] = decompose_regions(set);
    // annulus between the circles is X+; disk and unbounded region are X-
    std::vector<Vec2> probes = {Vec2(1.5, 0), Vec2(0, -1.7), Vec2(0.5, 0), Vec2(3, 1), Vec2(0, 0)};
    for (const Vec2& p : probes) {
        int parity = 0;
        for (const auto& c : set.components) parity += ray_crossing_parity_odd(p, c) ? 1 : 0;
        REQUIRE(plus.contains(p) == (parity % 2 == 1));
    }
}

TEST_CASE("decompose_regions: orientation flip swaps the regions", "[curves][property]") {
    IdealCurveSet set;
    set.components.push_back(make_circle(Vec2(0, 0), 2.0, 128, Orientation::CCW));
    set.components.push_back(make_circle(Vec2(5, 0), 1.0, 128, Orientation::CW));
    IdealCurveSet flipped = set;
    for (auto& c : flipped.components) c.reverse();
    auto [p1, m1] = decompose_regions(set);
    auto [p2, m2] = decompose_regions(flipped);
    for (const Vec2& q : {Vec2(0, 0), Vec2(5, 0.5), Vec2(3, 0), Vec2(5, 2), Vec2(-4, 1)}) {
        REQUIRE(p1.contains(q) == m2.contains(q));
        REQUIRE(m1.contains(q) == p2.contains(q));
    }
}

TEST_CASE("decompose_regions rejects intersecting components", "[curves]") {
    IdealCurveSet set;
    set.components.push_back(make_circle(Vec2(0, 0), 1.0));
    set.components.push_back(make_circle(Vec2(1, 0), 1.0));
    REQUIRE_THROWS_AS(decompose_regions(set), std::invalid_argument);
}

TEST_CASE("six disjoint circles: region contains the bridge endpoints' neighborhood", "[curves]") {
    IdealCurveSet set;
    for (int i = 0; i < 6; ++i)
        set.components.push_back(
            make_circle(Vec2(3.0 * (i % 3), 3.0 * (i / 3)), 0.8, 128, Orientation::CW));
    auto [plus, minus] = decompose_regions(set);
    // CW circles: common exterior on the left -> X+, every disk interior X-
    REQUIRE(plus.contains(Vec2(1.5, 0)));
    REQUIRE(plus.contains(Vec2(1.5, 3)));
    REQUIRE(plus.contains(Vec2(-3, -3)));
    for (int i = 0; i < 6; ++i) REQUIRE(minus.contains(Vec2(3.0 * (i % 3), 3.0 * (i / 3))));

    // a bridge inside one component's exterior: count rule gives 6 + 1
    BridgeArc alpha;
    IdealCurve circ = make_circle(Vec2(0, 0), 0.8, 128, Orientation::CW);
    alpha.arc = exterior_return_arc();
    for (auto& p : alpha.arc.samples) p *= 0.8;
    IdealCurveSet six = set;
    REQUIRE(component_count_rule(six, alpha) == 7);
}

TEST_CASE("validate_bridge: exterior return arc on one circle passes", "[curves]") {
    IdealCurveSet set;
    set.components.push_back(make_circle(Vec2(0, 0), 1.0, 512, Orientation::CW));
    BridgeArc alpha;
    alpha.arc = exterior_return_arc();
    BridgeValidation v = validate_bridge(set, alpha);
    CAPTURE(v.violations);
    REQUIRE(v.ok());
    REQUIRE(v.endpoint_components[0] == 0);
    REQUIRE(v.endpoint_components[1] == 0);
    REQUIRE(v.angle_error_deg < 1.0);
}

TEST_CASE("validate_bridge: non-orthogonal chord fails", "[curves]") {
    IdealCurveSet set;
    set.components.push_back(make_circle(Vec2(0, 0), 1.0, 512));
    BridgeArc alpha;
    alpha.arc.closed = false;
    for (int i = 0; i <= 100; ++i) {
        const double u = i / 100.0;
        alpha.arc.samples.push_back((1 - u) * Vec2(1, 0) + u * Vec2(0, 1));
    }
    BridgeValidation v = validate_bridge(set, alpha);
    REQUIRE(!v.ok());
    REQUIRE(!v.orthogonal);
}

TEST_CASE("validate_bridge: axis arc between two circles passes", "[curves]") {
    IdealCurveSet set;
    set.components.push_back(make_circle(Vec2(-2, 0), 1.0, 512, Orientation::CW));
    set.components.push_back(make_circle(Vec2(2, 0), 1.0, 512, Orientation::CW));
    BridgeArc alpha;
    alpha.arc = axis_arc(-1.0, 1.0);
    BridgeValidation v = validate_bridge(set, alpha);
    CAPTURE(v.violations);
    REQUIRE(v.ok());
    REQUIRE(v.endpoint_components[0] != v.endpoint_components[1]);
    REQUIRE(component_count_rule(set, alpha) == 1);
}

TEST_CASE("build_foliation: bridge joining two circles gives connected levels", "[foliation]") {
    IdealCurveSet set;
    set.components.push_back(make_circle(Vec2(-2, 0), 1.0, 512, Orientation::CW));
    set.components.push_back(make_circle(Vec2(2, 0), 1.0, 512, Orientation::CW));
    BridgeArc alpha;
    alpha.arc = axis_arc(-1.0, 1.0);
    const double delta = 0.3;
    FoliationFamily fam = build_foliation(set, alpha, delta, 0.05);

    IdealCurveSet prev;
    double prev_min = std::numeric_limits<double>::infinity();
    for (double t : {delta, delta / 2, delta / 4}) {
        IdealCurveSet gt = fam.curves_at(t);
        REQUIRE(gt.count() == 1);
        REQUIRE(!curve_self_intersects(gt.components[0]));
        if (prev.count() > 0) {
            const double d = set_min_distance(prev, gt);
            REQUIRE(d > 0.0);
            REQUIRE(d < prev_min);
        }
        prev = gt;
        (void)prev_min;
    }
}

TEST_CASE("build_foliation: bridge on one circle gives two components", "[foliation]") {
    IdealCurveSet set;
    set.components.push_back(make_circle(Vec2(0, 0), 1.0, 512, Orientation::CW));
    BridgeArc alpha;
    alpha.arc = exterior_return_arc();
    const double delta = 0.2;
    FoliationFamily fam = build_foliation(set, alpha, delta, 0.05);
    for (double t : {delta, delta / 3}) {
        IdealCurveSet gt = fam.curves_at(t);
        REQUIRE(gt.count() == 2);
    }
    REQUIRE(component_count_rule(set, alpha) == 2);
}

TEST_CASE("build_foliation: Hausdorff distance to the limit decreases", "[foliation]") {
    IdealCurveSet set;
    set.components.push_back(make_circle(Vec2(-2, 0), 1.0, 512, Orientation::CW));
    set.components.push_back(make_circle(Vec2(2, 0), 1.0, 512, Orientation::CW));
    BridgeArc alpha;
    alpha.arc = axis_arc(-1.0, 1.0);
    const double delta = 0.3;
    FoliationFamily fam = build_foliation(set, alpha, delta, 0.05);

    // symmetric Hausdorff measured point-to-polyline, so curve sampling
    // density does not put a floor under the distance
    std::vector<IdealCurve> limit_curves(set.components.begin(), set.components.end());
    limit_curves.push_back(alpha.arc);
    auto dist_to = [](const Vec2& p, const std::vector<IdealCurve>& curves) {
        double d = std::numeric_limits<double>::infinity();
        for (const auto& c : curves) d = std::min(d, nearest_on_curve(p, c).distance);
        return d;
    };
    auto hausdorff = [&](const std::vector<IdealCurve>& A, const std::vector<IdealCurve>& B) {
        double h = 0.0;
        for (const auto& c : A)
            for (const Vec2& p : c.samples) h = std::max(h, dist_to(p, B));
        for (const auto& c : B)
            for (const Vec2& p : c.samples) h = std::max(h, dist_to(p, A));
        return h;
    };

    double prev_h = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= 10; ++k) {
        const double t = delta / std::pow(2.0, k);
        const double h = hausdorff(fam.curves_at(t).components, limit_curves);
        REQUIRE(h < prev_h);
        prev_h = h;
    }
    REQUIRE(prev_h < 2.0 * delta / 1024.0 + 1e-3);
}

TEST_CASE("build_foliation rejects a bridge too close to another component", "[foliation]") {
    IdealCurveSet set;
    set.components.push_back(make_circle(Vec2(-2, 0), 1.0, 256, Orientation::CW));
    set.components.push_back(make_circle(Vec2(2, 0), 1.0, 256, Orientation::CW));
    set.components.push_back(make_circle(Vec2(0, 0.6), 0.2, 128, Orientation::CW));
    BridgeArc alpha;
    alpha.arc = axis_arc(-1.0, 1.0);
    // arc clearance to the small circle is 0.4, below delta
    REQUIRE_THROWS_WITH(build_foliation(set, alpha, 0.45, 0.05),
                        Catch::Matchers::ContainsSubstring("not embedded"));
}

TEST_CASE("build_foliation commutes with boundary rotations", "[foliation][property]") {
    const double th = 0.73;
    Eigen::Rotation2D<double> rot(th);
    IdealCurveSet set;
    set.components.push_back(make_circle(Vec2(-2, 0), 1.0, 512, Orientation::CW));
    set.components.push_back(make_circle(Vec2(2, 0), 1.0, 512, Orientation::CW));
    BridgeArc alpha;
    alpha.arc = axis_arc(-1.0, 1.0);
    IdealCurveSet rset = set;
    for (auto& c : rset.components)
        for (auto& p : c.samples) p = rot * p;
    BridgeArc ralpha = alpha;
    for (auto& p : ralpha.arc.samples) p = rot * p;

    const double t = 0.2;
    IdealCurveSet a = build_foliation(set, alpha, 0.3, 0.05).curves_at(t);
    IdealCurveSet b = build_foliation(rset, ralpha, 0.3, 0.05).curves_at(t);
    std::vector<Vec2> a_rot = all_samples(a);
    for (auto& p : a_rot) p = rot * p;
    REQUIRE(hausdorff_distance(a_rot, all_samples(b)) < 3.0 * (t / 4.0));
}

TEST_CASE("linking_test on disks", "[curves]") {
    auto disk = [](const Vec2& c, double r) {
        IdealCurveSet s;
        s.components.push_back(make_circle(c, r, 128, Orientation::CCW));
        return RegionDescriptor{s, RegionSide::Plus};
    };
    REQUIRE(linking_test(disk(Vec2(0, 0), 1.0), disk(Vec2(5, 0), 1.0)) == LinkingType::Disjoint);
    REQUIRE(linking_test(disk(Vec2(0, 0), 1.0), disk(Vec2(0, 0), 2.0)) == LinkingType::Nested);
    REQUIRE(linking_test(disk(Vec2(0, 0), 1.0), disk(Vec2(1, 0), 1.0)) == LinkingType::Linked);
}

TEST_CASE("separation_curve finds round separators", "[curves]") {
    IdealCurveSet g1, g2;
    g1.components.push_back(make_circle(Vec2(2, 0), 1.0, 128));
    g2.components.push_back(make_circle(Vec2(-2, 0), 2.0, 128));
    auto beta = separation_curve(g1, g2);
    REQUIRE(beta.has_value());
    if (beta->closed) {
        // every sample of one system inside beta, the other outside
        bool g1_in = point_in_closed_curve(g1.components[0].samples[0], *beta);
        for (const Vec2& p : g1.components[0].samples)
            REQUIRE(point_in_closed_curve(p, *beta) == g1_in);
        for (const Vec2& p : g2.components[0].samples)
            REQUIRE(point_in_closed_curve(p, *beta) == !g1_in);
    }
    for (const auto& c : {g1.components[0], g2.components[0]})
        REQUIRE(curves_min_distance(c, *beta) > 0.0);
}

TEST_CASE("separation_curve on concentric circles", "[curves]") {
    IdealCurveSet g1, g2;
    g1.components.push_back(make_circle(Vec2(0, 0), 1.0, 128));
    g2.components.push_back(make_circle(Vec2(0, 0), 3.0, 128));
    auto beta = separation_curve(g1, g2);
    REQUIRE(beta.has_value());
    REQUIRE(beta->closed);
    // separator is a circle about the origin with radius strictly between
    for (const Vec2& p : beta->samples) {
        REQUIRE(p.norm() > 1.0);
        REQUIRE(p.norm() < 3.0);
    }
}

TEST_CASE("separation_curve is inconclusive on interleaved systems", "[curves]") {
    // four small circles alternating around a common latitude circle on the
    // sphere at infinity: no plane can separate alternating clusters
    IdealCurveSet g1, g2;
    g1.components.push_back(make_circle(Vec2(3, 0), 0.3, 64));
    g1.components.push_back(make_circle(Vec2(-3, 0), 0.3, 64));
    g2.components.push_back(make_circle(Vec2(0, 3), 0.3, 64));
    g2.components.push_back(make_circle(Vec2(0, -3), 0.3, 64));
    REQUIRE(!separation_curve(g1, g2).has_value());
}
