#ifndef HSURF_FOLIATION_HPP
#define HSURF_FOLIATION_HPP

#include <hsurf/curves.hpp>

#include <cstdint>
#include <functional>
#include <map>
#include <queue>
#include <set>
#include <sstream>

// The foliation {Gamma_t} of the region between a curve system and a small
// pushoff of (curve system + bridge arc): level sets of the signed distance
// to Gamma union alpha, extracted by marching squares in a band around the
// level and chained into closed loops.
namespace hsurf {

inline int component_count_rule(const IdealCurveSet& gamma, const BridgeArc& alpha) {
    const BridgeValidation v = validate_bridge(gamma, alpha);
    if (!v.ok()) throw std::invalid_argument("component_count_rule: invalid bridge");
    return v.endpoint_components[0] == v.endpoint_components[1] ? gamma.count() + 1
                                                                : gamma.count() - 1;
}

namespace detail {

/// Signed distance to Gamma union alpha, positive on the side the levels
/// grow into. A splitting bridge (endpoints on one component) has its arc in
/// X+ and the levels erode X+; a merging bridge crosses X- and the levels
/// dilate outward around the union, so the sign flips.
struct SignedField {
    const IdealCurveSet* gamma;
    const IdealCurve* arc;
    bool outward = false;

    double operator()(const Vec2& p) const {
        const NearestHit hg = gamma->nearest(p);
        const NearestHit ha = nearest_on_curve(p, *arc);
        const double d = std::min(hg.distance, ha.distance);
        if (ha.distance < hg.distance) return d;  // near the arc: level side
        const bool plus = classify_point(*gamma, p) == RegionSide::Plus;
        return plus != outward ? d : -d;
    }
};

struct CellKey {
    int64_t i, j;
    bool operator<(const CellKey& o) const { return i != o.i ? i < o.i : j < o.j; }
};

// quantized point key for welding marching-squares segment endpoints
inline std::pair<int64_t, int64_t> quantize(const Vec2& p, double h) {
    const double s = 16384.0 / h;
    return {static_cast<int64_t>(std::llround(p.x() * s)),
            static_cast<int64_t>(std::llround(p.y() * s))};
}

}  // namespace detail

/// Extract the level set {field = level} near the given seed points as a set
/// of closed polylines. `h` is the grid spacing; the search is band-limited
/// to cells reachable from the seeds whose corner values straddle the level.
inline std::vector<IdealCurve> extract_level_set(const std::function<double(const Vec2&)>& field,
                                                 double level, const std::vector<Vec2>& seeds,
                                                 double h, int resample_n = 0) {
    using detail::CellKey;
    std::map<std::pair<int64_t, int64_t>, double> node_cache;
    auto value = [&](int64_t i, int64_t j) {
        auto it = node_cache.find({i, j});
        if (it != node_cache.end()) return it->second;
        const double v = field(Vec2(i * h, j * h));
        node_cache.insert({{i, j}, v});
        return v;
    };
    auto straddles = [&](const CellKey& c) {
        const double v00 = value(c.i, c.j), v10 = value(c.i + 1, c.j);
        const double v01 = value(c.i, c.j + 1), v11 = value(c.i + 1, c.j + 1);
        const double lo = std::min({v00, v10, v01, v11});
        const double hi = std::max({v00, v10, v01, v11});
        return lo <= level && hi >= level;
    };

    // band-limited BFS over straddling cells, seeded near the expected level set
    std::set<CellKey> visited, active;
    std::queue<CellKey> frontier;
    for (const Vec2& s : seeds) {
        const int64_t ci = static_cast<int64_t>(std::floor(s.x() / h));
        const int64_t cj = static_cast<int64_t>(std::floor(s.y() / h));
        for (int64_t di = -2; di <= 2; ++di)
            for (int64_t dj = -2; dj <= 2; ++dj) {
                CellKey c{ci + di, cj + dj};
                if (visited.count(c)) continue;
                visited.insert(c);
                if (straddles(c)) { active.insert(c); frontier.push(c); }
            }
    }
    while (!frontier.empty()) {
        CellKey c = frontier.front();
        frontier.pop();
        for (int64_t di = -1; di <= 1; ++di)
            for (int64_t dj = -1; dj <= 1; ++dj) {
                CellKey n{c.i + di, c.j + dj};
                if (visited.count(n)) continue;
                visited.insert(n);
                if (straddles(n)) { active.insert(n); frontier.push(n); }
            }
    }

    // marching squares on active cells; collect segments with welded endpoints
    using PKey = std::pair<int64_t, int64_t>;
    std::vector<std::pair<Vec2, Vec2>> segments;
    std::map<PKey, std::vector<int>> at_point;  // point key -> incident segment ids
    auto edge_point = [&](int64_t i0, int64_t j0, int64_t i1, int64_t j1) -> Vec2 {
        const double v0 = value(i0, j0), v1 = value(i1, j1);
        const double u = std::clamp((level - v0) / (v1 - v0), 0.0, 1.0);
        return Vec2((i0 + u * (i1 - i0)) * h, (j0 + u * (j1 - j0)) * h);
    };
    for (const CellKey& c : active) {
        const double v[4] = {value(c.i, c.j), value(c.i + 1, c.j), value(c.i + 1, c.j + 1),
                             value(c.i, c.j + 1)};
        const int64_t xi[4] = {c.i, c.i + 1, c.i + 1, c.i};
        const int64_t yj[4] = {c.j, c.j, c.j + 1, c.j + 1};
        std::vector<Vec2> pts;
        std::vector<int> edges;
        for (int e = 0; e < 4; ++e) {
            const int f = (e + 1) % 4;
            if ((v[e] > level) != (v[f] > level)) {
                pts.push_back(edge_point(xi[e], yj[e], xi[f], yj[f]));
                edges.push_back(e);
            }
        }
        auto add_seg = [&](const Vec2& a, const Vec2& b) {
            if ((a - b).norm() < 1e-12 * h) return;
            const int id = static_cast<int>(segments.size());
            segments.emplace_back(a, b);
            at_point[detail::quantize(a, h)].push_back(id);
            at_point[detail::quantize(b, h)].push_back(id);
        };
        if (pts.size() == 2) {
            add_seg(pts[0], pts[1]);
        } else if (pts.size() == 4) {
            // saddle: resolve by the center value
            const double vc = 0.25 * (v[0] + v[1] + v[2] + v[3]);
            if ((vc > level) == (v[0] > level)) {
                add_seg(pts[0], pts[3]);
                add_seg(pts[1], pts[2]);
            } else {
                add_seg(pts[0], pts[1]);
                add_seg(pts[2], pts[3]);
            }
        }
    }

    // chain segments into closed loops
    std::vector<IdealCurve> loops;
    std::vector<bool> used(segments.size(), false);
    for (size_t s0 = 0; s0 < segments.size(); ++s0) {
        if (used[s0]) continue;
        std::vector<Vec2> loop;
        int cur = static_cast<int>(s0);
        Vec2 head = segments[s0].first;
        Vec2 tail = segments[s0].second;
        used[s0] = true;
        loop.push_back(head);
        loop.push_back(tail);
        bool closed = false;
        while (true) {
            const PKey k = detail::quantize(tail, h);
            int next = -1;
            for (int id : at_point[k])
                if (!used[id]) { next = id; break; }
            if (next < 0) break;
            used[next] = true;
            const Vec2& a = segments[next].first;
            const Vec2& b = segments[next].second;
            tail = detail::quantize(a, h) == k ? b : a;
            if (detail::quantize(tail, h) == detail::quantize(head, h)) { closed = true; break; }
            loop.push_back(tail);
        }
        if (!closed || loop.size() < 6) continue;  // drop open stubs / grid noise
        IdealCurve c;
        c.samples = std::move(loop);
        c.closed = true;
        if (c.signed_area() < 0.0) c.reverse();
        c.orientation = Orientation::CCW;
        if (resample_n > 2) c = resample_by_arclength(c, resample_n);
        loops.push_back(std::move(c));
    }
    return loops;
}

struct FoliationFamily {
    double delta = 0.0;
    double epsilon = 0.0;
    std::function<IdealCurveSet(double)> evaluator;

    IdealCurveSet curves_at(double t) const {
        if (t <= 0.0 || t > delta) throw std::invalid_argument("curves_at: t outside (0, delta]");
        return evaluator(t);
    }
};

/// Build the family Gamma_t = {p in X+ : dist(p, Gamma union alpha) = t},
/// 0 < t <= delta. Fails if the bridge is invalid or the delta-neighborhood
/// of the arc is not embedded (arc interior too close to the curve system).
inline FoliationFamily build_foliation(const IdealCurveSet& gamma, const BridgeArc& alpha,
                                       double delta, double epsilon) {
    const BridgeValidation v = validate_bridge(gamma, alpha);
    if (!v.ok()) {
        std::string msg = "build_foliation: invalid bridge:";
        for (const auto& s : v.violations) msg += " " + s + ";";
        throw std::invalid_argument(msg);
    }
    // embedding check: interior of the arc (away from the ends) must clear
    // the curve system by more than delta, and distinct components of Gamma
    // must be separated by more than 2 delta
    const double scale = std::max(1.0, alpha.arc.length());
    double arc_clearance = std::numeric_limits<double>::infinity();
    for (int i = 1; i + 1 < alpha.arc.size(); ++i) {
        const Vec2& p = alpha.arc.samples[i];
        const double to_end = std::min((p - alpha.arc.samples.front()).norm(),
                                       (p - alpha.arc.samples.back()).norm());
        if (to_end < 2.0 * delta) continue;
        arc_clearance = std::min(arc_clearance, gamma.distance(p));
    }
    if (arc_clearance <= delta) {
        std::ostringstream os;
        os << "build_foliation: neighborhood not embedded, arc clearance " << arc_clearance
           << " <= delta " << delta;
        throw std::invalid_argument(os.str());
    }
    if (gamma.count() > 1) {
        const double sep = gamma.min_separation();
        if (sep <= 2.0 * delta) {
            std::ostringstream os;
            os << "build_foliation: neighborhood not embedded, component separation " << sep
               << " <= 2 delta " << 2.0 * delta;
            throw std::invalid_argument(os.str());
        }
    }

    const int expected = component_count_rule(gamma, alpha);
    // a bridge through X- (side-by-side merge) dilates the levels outward
    // around the union; a bridge through X+ (split, or a merge across a
    // nested annulus) erodes X+ instead
    const bool outward = v.side == RegionSide::Minus;
    IdealCurveSet gamma_copy = gamma;
    IdealCurve arc_copy = alpha.arc;

    FoliationFamily fam;
    fam.delta = delta;
    fam.epsilon = epsilon;
    fam.evaluator = [gamma_copy, arc_copy, expected, scale, outward](double t) {
        detail::SignedField F{&gamma_copy, &arc_copy, outward};
        const double h = std::max(t / 4.0, 1e-4 * scale);
        std::vector<Vec2> seeds;
        for (const auto& c : gamma_copy.components) {
            for (int i = 0; i < c.size(); ++i) {
                const Vec2 tan = c.tangent(i);
                const Vec2 n(-tan.y(), tan.x());  // left normal: into X+
                seeds.push_back(c.samples[i] + (outward ? -t : t) * n);
            }
        }
        for (int i = 0; i < arc_copy.size(); ++i) {
            const Vec2 tan = arc_copy.tangent(i);
            const Vec2 n(-tan.y(), tan.x());
            seeds.push_back(arc_copy.samples[i] + t * n);
            seeds.push_back(arc_copy.samples[i] - t * n);
        }
        const int resample_n = 0;  // keep native marching-squares resolution
        std::vector<IdealCurve> loops =
            extract_level_set([&F](const Vec2& p) { return F(p); }, t, seeds, h, resample_n);
        IdealCurveSet out;
        out.components = std::move(loops);
        if (out.count() != expected) {
            std::ostringstream os;
            os << "foliation level t=" << t << " produced " << out.count()
               << " components, expected " << expected;
            throw std::runtime_error(os.str());
        }
        return out;
    };
    return fam;
}

}  // namespace hsurf

#endif  // HSURF_FOLIATION_HPP
