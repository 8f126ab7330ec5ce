#ifndef HSURF_BUILDER_HPP
#define HSURF_BUILDER_HPP

#include <hsurf/analytic.hpp>
#include <hsurf/foliation.hpp>
#include <hsurf/solver.hpp>

#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace hsurf {

// ---------------------------------------------------------------------------
// Target signatures and construction programs.

/// What to build: a finite-type surface (genus g, k ends), or the first N
/// stages of a simple exhaustion given piece by piece. `nonproper` requests
/// the interleaved plane/igloo program; that route only works at H = 0.
struct SurfaceSignature {
    enum class Mode { FiniteType, ExhaustionDepth };
    enum class Piece { Pants, HandleBlock };

    Mode mode = Mode::FiniteType;
    int genus = 0;
    int ends = 1;
    std::vector<Piece> stages;  // ExhaustionDepth only: one nonannular piece per stage
    bool nonproper = false;

    void validate() const {
        if (mode == Mode::FiniteType) {
            if (genus < 0 || ends < 1)
                throw std::invalid_argument("SurfaceSignature: need g >= 0, k >= 1");
        } else if (stages.empty()) {
            throw std::invalid_argument("SurfaceSignature: exhaustion needs at least one stage");
        }
    }

    /// Exhaustion pieces in canonical order (handles first, then pants).
    std::vector<Piece> stage_list() const {
        if (mode == Mode::ExhaustionDepth) return stages;
        std::vector<Piece> out;
        for (int i = 0; i < genus; ++i) out.push_back(Piece::HandleBlock);
        for (int i = 1; i < ends; ++i) out.push_back(Piece::Pants);
        return out;
    }
};

enum class StepKind { SeedDisk, AttachBridge, AttachHandle, AttachPlane, InstallTunnel, InstallIgloo };

inline const char* step_name(StepKind k) {
    switch (k) {
        case StepKind::SeedDisk: return "SeedDisk";
        case StepKind::AttachBridge: return "AttachBridge";
        case StepKind::AttachHandle: return "AttachHandle";
        case StepKind::AttachPlane: return "AttachPlane";
        case StepKind::InstallTunnel: return "InstallTunnel";
        case StepKind::InstallIgloo: return "InstallIgloo";
    }
    return "?";
}

struct StepTopology {
    int chi = 1, genus = 0, ends = 1;
    bool operator==(const StepTopology& o) const {
        return chi == o.chi && genus == o.genus && ends == o.ends;
    }
};

struct ProgramStep {
    StepKind kind = StepKind::SeedDisk;
    Vec2 center = Vec2::Zero();   // SeedDisk / AttachPlane circle, InstallIgloo sphere
    double radius = 0.0;
    int plane_index = 0;          // AttachPlane n (radius 1 + 1/n)
    Vec2 anchor = Vec2::Zero();   // bridge placement hint; igloo door position
    bool to_plane = false;        // AttachBridge fused with the following AttachPlane
    double shell_thickness = 0.04;  // InstallIgloo
    double door_radius = 0.45;      // InstallIgloo
    StepTopology predicted;
};

/// Accumulation data for a nonproper program: the planned plane circles
/// shrink strictly toward the limit circle, all about one center.
struct NonproperCertificate {
    Vec2 accumulation_center = Vec2(-2.0, 0.0);
    double accumulation_radius = 1.0;
    std::vector<double> plane_radii;

    bool valid() const {
        for (size_t i = 0; i + 1 < plane_radii.size(); ++i)
            if (plane_radii[i + 1] >= plane_radii[i]) return false;
        return !plane_radii.empty() && plane_radii.back() > accumulation_radius;
    }
};

struct ConstructionProgram {
    double H = 0.0;
    bool nonproper = false;
    std::vector<ProgramStep> steps;
    std::optional<NonproperCertificate> certificate;

    const StepTopology& final_topology() const {
        if (steps.empty()) throw std::logic_error("empty program");
        return steps.back().predicted;
    }
};

namespace detail {

inline void check_chi(const StepTopology& t) {
    if (t.chi != 2 - 2 * t.genus - t.ends)
        throw std::logic_error("program step breaks the chi = 2 - 2g - k ledger");
}

inline StepTopology after_bridge(StepTopology t) {
    t.chi -= 1;
    t.ends += 1;
    check_chi(t);
    return t;
}

inline StepTopology after_handle(StepTopology t) {
    t.chi -= 2;
    t.genus += 1;
    check_chi(t);
    return t;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Planners.

/// Seed disk, then one step per exhaustion stage: Pants -> AttachBridge,
/// HandleBlock -> AttachHandle. FiniteType compiles to g handles then k - 1
/// pants in that canonical order.
inline ConstructionProgram plan_exhaustion(const SurfaceSignature& sig, double H = 0.0) {
    sig.validate();
    if (sig.nonproper) throw std::invalid_argument("plan_exhaustion: use plan_nonproper");
    ConstructionProgram prog;
    prog.H = H;
    StepTopology top;  // the seed disk
    ProgramStep seed;
    seed.kind = StepKind::SeedDisk;
    seed.center = Vec2(0.0, 0.0);
    seed.radius = 1.0;
    seed.predicted = top;
    prog.steps.push_back(seed);
    for (const auto piece : sig.stage_list()) {
        ProgramStep s;
        s.anchor = seed.center;
        if (piece == SurfaceSignature::Piece::Pants) {
            s.kind = StepKind::AttachBridge;
            top = detail::after_bridge(top);
        } else {
            s.kind = StepKind::AttachHandle;
            top = detail::after_handle(top);
        }
        s.predicted = top;
        prog.steps.push_back(s);
    }
    if (sig.mode == SurfaceSignature::Mode::FiniteType &&
        (top.genus != sig.genus || top.ends != sig.ends))
        throw std::logic_error("plan_exhaustion: final type disagrees with the signature");
    return prog;
}

/// The interleaved nonproper program: a seed disk on the right, an igloo
/// around it, then plane after plane accumulating on the radius-1 circle at
/// (-2, 0), each attached through a bridge that crosses the previous igloo's
/// door; exhaustion pieces of `sig` are worked in between planes. H = 0 only.
inline ConstructionProgram plan_nonproper(const SurfaceSignature& sig, int depth) {
    sig.validate();
    if (depth < 1) throw std::invalid_argument("plan_nonproper: depth >= 1 required");
    ConstructionProgram prog;
    prog.H = 0.0;
    prog.nonproper = true;
    const Vec2 left(-2.0, 0.0);
    auto plane_radius = [](int n) { return 1.0 + 1.0 / n; };
    auto igloo_radius = [](int n) {
        return 1.0 + (2.0 * n + 1.0) / (2.0 * n * (n + 1.0));
    };
    const std::vector<SurfaceSignature::Piece> pieces = sig.stage_list();
    size_t next_piece = 0;
    StepTopology top;

    ProgramStep seed;
    seed.kind = StepKind::SeedDisk;
    seed.center = Vec2(2.0, 0.0);
    seed.radius = 1.0;
    seed.predicted = top;
    prog.steps.push_back(seed);

    // igloo lambda_1 around the seed; its door sits where the first bridge mu
    // crosses the separating circle on the ground
    ProgramStep ig1;
    ig1.kind = StepKind::InstallIgloo;
    ig1.center = seed.center;
    ig1.radius = 1.5;
    ig1.anchor = Vec2(0.5, 0.0);
    ig1.predicted = top;
    prog.steps.push_back(ig1);

    // mu = [0,1] x {0}: the bridge from the seed circle to the first plane
    // circle; the plane and its bridge execute as one fused merge, so both
    // steps leave (chi, g, k) unchanged
    ProgramStep mu;
    mu.kind = StepKind::AttachBridge;
    mu.to_plane = true;
    mu.anchor = Vec2(0.5, 0.0);
    mu.predicted = top;
    prog.steps.push_back(mu);

    ProgramStep p1;
    p1.kind = StepKind::AttachPlane;
    p1.plane_index = 1;
    p1.center = left;
    p1.radius = plane_radius(1);
    p1.predicted = top;
    prog.steps.push_back(p1);

    for (int n = 2; n <= depth; ++n) {
        if (next_piece < pieces.size()) {
            ProgramStep beta;
            beta.anchor = seed.center;
            if (pieces[next_piece] == SurfaceSignature::Piece::Pants) {
                beta.kind = StepKind::AttachBridge;
                top = detail::after_bridge(top);
            } else {
                beta.kind = StepKind::AttachHandle;
                top = detail::after_handle(top);
            }
            beta.predicted = top;
            prog.steps.push_back(beta);
            ++next_piece;
        }
        ProgramStep ig;
        ig.kind = StepKind::InstallIgloo;
        ig.center = left;
        ig.radius = igloo_radius(n);
        ig.anchor = left + Vec2(-ig.radius, 0.0);
        // the shell must clear the plane hemisphere just outside it, whose
        // radius exceeds the separator's by 1/(2n(n+1))
        ig.shell_thickness = std::min(0.04, 0.9 / (2.0 * n * (n + 1.0)));
        ig.predicted = top;
        prog.steps.push_back(ig);

        ProgramStep alpha;
        alpha.kind = StepKind::AttachBridge;
        alpha.to_plane = true;
        alpha.anchor = left + Vec2(-0.5 * (plane_radius(n - 1) + plane_radius(n)), 0.0);
        alpha.predicted = top;
        prog.steps.push_back(alpha);

        ProgramStep pn;
        pn.kind = StepKind::AttachPlane;
        pn.plane_index = n;
        pn.center = left;
        pn.radius = plane_radius(n);
        pn.predicted = top;
        prog.steps.push_back(pn);

        // a tunnel barrier goes in under the accepted bridge arc so later
        // igloos cannot seal the route between the planes
        ProgramStep tun;
        tun.kind = StepKind::InstallTunnel;
        tun.plane_index = n;
        tun.predicted = top;
        prog.steps.push_back(tun);
    }

    NonproperCertificate cert;
    cert.accumulation_center = left;
    for (int n = 1; n <= depth; ++n) cert.plane_radii.push_back(plane_radius(n));
    prog.certificate = cert;
    return prog;
}

/// One step per line, parameters in order; stable across runs.
inline std::string program_to_text(const ConstructionProgram& prog) {
    std::ostringstream os;
    os << "H " << prog.H << " nonproper " << (prog.nonproper ? 1 : 0) << "\n";
    for (const auto& s : prog.steps) {
        os << step_name(s.kind) << " center " << s.center.x() << " " << s.center.y()
           << " radius " << s.radius << " plane " << s.plane_index << " anchor "
           << s.anchor.x() << " " << s.anchor.y() << " to_plane " << (s.to_plane ? 1 : 0)
           << " predicted " << s.predicted.chi << " " << s.predicted.genus << " "
           << s.predicted.ends << "\n";
    }
    if (prog.certificate) {
        os << "accumulation " << prog.certificate->accumulation_center.x() << " "
           << prog.certificate->accumulation_center.y() << " radius "
           << prog.certificate->accumulation_radius << " planes";
        for (double r : prog.certificate->plane_radii) os << " " << r;
        os << "\n";
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Execution.

struct StageRecord {
    int index = 0;                   // program step index
    StepKind kind = StepKind::SeedDisk;
    StepTopology predicted;
    MeshTopologyReport observed;
    double t_level = 0.0;            // accepted continuation level (bridges)
    double i_h = 0.0;                // I_H of the stage mesh (self-referenced volume)
    double ball_radius = 0.0;        // largest clip radius matching the previous stage
    bool converged = false;
    std::vector<std::string> notes;
    TruncatedMesh mesh;
};

struct ExecutionError : std::runtime_error {
    int stage = -1;
    ExecutionError(int stage_, const std::string& what_)
        : std::runtime_error("stage " + std::to_string(stage_) + ": " + what_), stage(stage_) {}
};

namespace detail {

inline TruncatedMesh concat_meshes(const TruncatedMesh& a, const TruncatedMesh& b) {
    TruncatedMesh out = a;
    const int off = a.vcount();
    out.vertices.insert(out.vertices.end(), b.vertices.begin(), b.vertices.end());
    for (const auto& t : b.triangles)
        out.triangles.push_back({t[0] + off, t[1] + off, t[2] + off});
    for (const auto& r : b.boundary_rings) {
        std::vector<int> ring;
        for (int v : r) ring.push_back(v + off);
        out.boundary_rings.push_back(std::move(ring));
    }
    out.ring_curve_tags.assign(out.boundary_rings.size(), -1);
    return out;
}

inline double dist_to_ball_center(const Vec3& p) {
    return hyperbolic_distance_uhs(p, Vec3(0, 0, 1));
}

/// Submesh of triangles entirely inside the hyperbolic ball of radius r about
/// the upper-half-space point (0,0,1) (the origin of the ball model).
inline TruncatedMesh ball_clip(const TruncatedMesh& m, const std::vector<double>& dist,
                               double r) {
    TruncatedMesh out;
    out.z_cut = m.z_cut;
    std::map<int, int> remap;
    auto keep = [&](int v) {
        auto it = remap.find(v);
        if (it != remap.end()) return it->second;
        out.vertices.push_back(m.vertices[v]);
        remap[v] = out.vcount() - 1;
        return out.vcount() - 1;
    };
    for (const auto& t : m.triangles)
        if (dist[t[0]] < r && dist[t[1]] < r && dist[t[2]] < r)
            out.triangles.push_back({keep(t[0]), keep(t[1]), keep(t[2])});
    return out;
}

/// Largest scanned clip radius whose submesh matches the previous stage's
/// (chi, g, k). The ball excludes structure added since the previous stage at
/// the radii of interest, so no component filtering is needed.
inline double ball_schedule_radius(const TruncatedMesh& cur, const TruncatedMesh& prev,
                                   const StepTopology& prev_top) {
    (void)prev;
    std::vector<double> dist(cur.vcount());
    double dmin = std::numeric_limits<double>::infinity(), dmax = 0.0;
    for (int i = 0; i < cur.vcount(); ++i) {
        dist[i] = dist_to_ball_center(cur.vertices[i]);
        dmin = std::min(dmin, dist[i]);
        dmax = std::max(dmax, dist[i]);
    }
    const int n_scan = 48;
    for (int k = n_scan; k >= 1; --k) {
        const double r = dmin + (dmax - dmin) * k / (n_scan + 1.0);
        TruncatedMesh clip = ball_clip(cur, dist, r);
        if (clip.fcount() == 0) continue;
        MeshTopologyReport top;
        try {
            top = topology_report(clip);
        } catch (const std::exception&) {
            continue;  // defective clip (pinched boundary, non-integer genus); next radius
        }
        if (top.euler_characteristic == prev_top.chi && top.genus == prev_top.genus &&
            top.boundary_count == prev_top.ends)
            return r;
    }
    return std::numeric_limits<double>::quiet_NaN();
}

/// Unit normal of the curve system at a point on it, pointing into X+.
inline Vec2 inward_normal_at(const IdealCurveSet& gamma, const NearestHit& h) {
    const IdealCurve& c = gamma.components[h.component];
    const Vec2 a = c.at(h.segment), b = c.at(h.segment + 1);
    const double seg_len = (b - a).norm();
    Vec2 tan;
    if ((h.point - a).norm() < 0.25 * seg_len)
        tan = c.tangent(h.segment);
    else if ((h.point - b).norm() < 0.25 * seg_len)
        tan = c.tangent(h.segment + 1);
    else
        tan = (b - a).normalized();
    return Vec2(-tan.y(), tan.x());  // left of the oriented curve = X+
}

/// Hermite arc from a to b leaving and arriving along the given end
/// directions (unit, pointing from the endpoint into the arc).
inline IdealCurve hermite_arc(const Vec2& a, const Vec2& na, const Vec2& b, const Vec2& nb,
                              int n_samples = 200) {
    IdealCurve arc;
    arc.closed = false;
    const double s = (b - a).norm();
    const Vec2 m0 = s * na, m1 = -s * nb;
    for (int i = 0; i < n_samples; ++i) {
        const double t = static_cast<double>(i) / (n_samples - 1);
        const double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
        const double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
        arc.samples.push_back(h00 * a + h10 * m0 + h01 * b + h11 * m1);
    }
    return arc;
}

/// First crossings of the target component along +/-dir from p0; the chord
/// between them, bent by a Hermite blend so it meets the curve orthogonally.
inline std::optional<IdealCurve> chord_arc(const IdealCurveSet& gamma, int target,
                                           const Vec2& p0, double theta) {
    const IdealCurve& c = gamma.components[target];
    const Vec2 dir(std::cos(theta), std::sin(theta));
    double t_pos = std::numeric_limits<double>::infinity();
    double t_neg = -std::numeric_limits<double>::infinity();
    const int n = c.size();
    for (int i = 0; i < n; ++i) {
        const Vec2 a = c.at(i), b = c.at(i + 1);
        // solve p0 + t dir = a + u (b - a)
        const Vec2 e = b - a;
        const double det = dir.x() * (-e.y()) - dir.y() * (-e.x());
        if (std::abs(det) < 1e-14) continue;
        const Vec2 r = a - p0;
        const double t = (r.x() * (-e.y()) - r.y() * (-e.x())) / det;
        const double u = (dir.x() * r.y() - dir.y() * r.x()) / det;
        if (u < 0.0 || u > 1.0) continue;
        if (t > 1e-9 && t < t_pos) t_pos = t;
        if (t < -1e-9 && t > t_neg) t_neg = t;
    }
    if (!std::isfinite(t_pos) || !std::isfinite(t_neg)) return std::nullopt;
    const Vec2 pa = p0 + t_neg * dir, pb = p0 + t_pos * dir;
    const NearestHit ha = nearest_on_curve(pa, c), hb = nearest_on_curve(pb, c);
    IdealCurveSet one;
    one.components.push_back(c);
    NearestHit ha2 = ha, hb2 = hb;
    ha2.component = hb2.component = 0;
    Vec2 na = inward_normal_at(one, ha2), nb = inward_normal_at(one, hb2);
    if (na.dot(pb - pa) < 0.0) na = -na;  // robust against local winding noise
    if (nb.dot(pa - pb) < 0.0) nb = -nb;
    return hermite_arc(ha.point, na, hb.point, nb);
}

/// Common-perpendicular segment between two components near the given point:
/// alternate nearest-point projections until the segment stabilizes.
inline IdealCurve perpendicular_arc(const IdealCurveSet& gamma, int comp_a, int comp_b,
                                    Vec2 p) {
    Vec2 a = p, b = p;
    for (int it = 0; it < 4; ++it) {
        a = nearest_on_curve(p, gamma.components[comp_a]).point;
        b = nearest_on_curve(p, gamma.components[comp_b]).point;
        p = 0.5 * (a + b);
    }
    IdealCurve arc;
    arc.closed = false;
    const int n = 200;
    for (int i = 0; i < n; ++i)
        arc.samples.push_back(a + (b - a) * (static_cast<double>(i) / (n - 1)));
    return arc;
}

inline double arc_clearance(const IdealCurveSet& gamma, const IdealCurve& arc) {
    const double scale = std::max(1.0, arc.length());
    double best = std::numeric_limits<double>::infinity();
    for (int i = 1; i + 1 < arc.size(); ++i) {
        const Vec2& q = arc.samples[i];
        const double to_end = std::min((q - arc.samples.front()).norm(),
                                       (q - arc.samples.back()).norm());
        if (to_end < 0.05 * scale) continue;
        best = std::min(best, gamma.distance(q));
    }
    return best;
}

inline double bridge_delta(const IdealCurveSet& gamma, const IdealCurve& arc) {
    double cap = 0.25;
    if (gamma.count() > 1) cap = std::min(cap, 0.45 * gamma.min_separation());
    const double scale = std::max(1.0, arc.length());
    // largest width whose embedding test passes: the arc interior (away from
    // the ends by 2 delta, matching the foliation's own check) must clear
    // the curve system by more than delta
    for (double d = cap; d > 1e-4; d *= 0.8) {
        double cl = std::numeric_limits<double>::infinity();
        for (int i = 1; i + 1 < arc.size(); ++i) {
            const Vec2& q = arc.samples[i];
            const double to_end = std::min((q - arc.samples.front()).norm(),
                                           (q - arc.samples.back()).norm());
            if (to_end < 2.0 * d) continue;
            cl = std::min(cl, gamma.distance(q));
        }
        if (cl > 1.05 * d && cl > 1e-3 * scale) return d;
    }
    throw std::runtime_error("bridge placement leaves no room for the foliation");
}

inline IdealCurveSet resample_level(const FoliationFamily& fol, double t, double grid_h) {
    IdealCurveSet gamma = fol.curves_at(t);
    for (auto& comp : gamma.components) {
        const int n = std::max(128, static_cast<int>(4.0 * comp.length() / grid_h));
        comp = resample_by_arclength(comp, n);
    }
    orient_by_nesting(gamma);
    return gamma;
}

}  // namespace detail

/// Run the program stage by stage: solve_plateau for the seed, bridge
/// continuation per AttachBridge/AttachHandle (the plane steps execute fused
/// with their bridge), obstacle installs with a warm re-solve. Each stage's
/// mesh topology must equal the step's prediction or execution aborts. Stage
/// acceptance is topological; residual convergence is recorded per stage.
inline std::vector<StageRecord> execute_program(const ConstructionProgram& prog,
                                                const SolverConfig& cfg) {
    if (prog.steps.empty() || prog.steps.front().kind != StepKind::SeedDisk)
        throw std::invalid_argument("execute_program: program must start with SeedDisk");
    if (prog.nonproper && prog.H != 0.0)
        throw std::invalid_argument("execute_program: nonproper programs require H = 0");
    if (prog.certificate && !prog.certificate->valid())
        throw std::invalid_argument("execute_program: accumulation certificate invalid");
    SolverConfig exec_cfg = cfg;
    exec_cfg.validate();
    const double H = prog.H;

    std::vector<StageRecord> records;
    IdealCurveSet gamma;
    SolveResult cur;
    IdealCurve last_plane_arc;  // most recent plane bridge, for InstallTunnel
    double last_plane_t = 0.0;
    double prev_ball_r = 0.0;

    auto check_topology = [&](int stage, const StepTopology& want, const TruncatedMesh& m,
                              StageRecord& rec) {
        rec.observed = topology_report(m);
        if (rec.observed.euler_characteristic != want.chi || rec.observed.genus != want.genus ||
            rec.observed.boundary_count != want.ends) {
            std::ostringstream os;
            os << "topology (" << rec.observed.euler_characteristic << "," << rec.observed.genus
               << "," << rec.observed.boundary_count << ") != predicted (" << want.chi << ","
               << want.genus << "," << want.ends << ")";
            throw ExecutionError(stage, os.str());
        }
    };
    auto finish_stage = [&](StageRecord& rec, const StepTopology& want, bool surface_changed) {
        check_topology(rec.index, want, cur.mesh, rec);
        rec.converged = cur.converged;
        if (!cur.converged) {
            std::ostringstream os;
            os << "residual " << cur.max_residual << " above target " << exec_cfg.residual_target
               << "; accepted on topology";
            rec.notes.push_back(os.str());
        }
        rec.i_h = i_h_functional(cur.mesh, cur.mesh, H);
        if (surface_changed && records.size() > 0) {
            const TruncatedMesh& prev = records.back().mesh;
            rec.ball_radius =
                detail::ball_schedule_radius(cur.mesh, prev, records.back().predicted);
            if (std::isnan(rec.ball_radius))
                rec.notes.push_back("no clip radius reproduces the previous stage topology");
            else if (rec.ball_radius <= prev_ball_r)
                rec.notes.push_back("ball radius schedule not increasing at this stage");
            if (!std::isnan(rec.ball_radius)) prev_ball_r = rec.ball_radius;
        }
        rec.mesh = cur.mesh;
        records.push_back(rec);
    };

    auto run_continuation = [&](int stage, const IdealCurveSet& g, const IdealCurve& arc,
                                const SolveResult& base, StageRecord& rec) {
        BridgeArc alpha;
        alpha.arc = arc;
        const BridgeValidation v = validate_bridge(g, alpha);
        if (!v.ok()) {
            std::string msg = "invalid bridge:";
            for (const auto& s : v.violations) msg += " " + s + ";";
            throw ExecutionError(stage, msg);
        }
        double delta = detail::bridge_delta(g, arc);
        FoliationFamily fol;
        for (int tries = 0;; ++tries) {
            fol = build_foliation(g, alpha, delta, delta);
            try {
                (void)fol.curves_at(delta);  // cheap level pre-test: component count
                break;
            } catch (const std::exception& e) {
                if (tries >= 12) throw ExecutionError(stage, std::string("foliation: ") + e.what());
                delta *= 0.7;
            }
        }
        ContinuationResult cr = continuation_bridge(base, fol, H, exec_cfg, 5,
                                                    /*topology_only=*/true);
        if (!cr.ok) {
            std::string msg = "continuation failed:";
            for (const auto& s : cr.failures) msg += " " + s + ";";
            throw ExecutionError(stage, msg);
        }
        cur = std::move(cr.solve);
        gamma = detail::resample_level(fol, cr.t_chosen, exec_cfg.grid_h);
        rec.t_level = cr.t_chosen;
        return cr.t_chosen;
    };

    // choose the splitting chord through the anchor at the angle with the
    // most interior room; deterministic scan
    auto best_chord = [&](int stage, const Vec2& anchor) {
        int target = 0;
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < gamma.count(); ++i) {
            const double d = nearest_on_curve(anchor, gamma.components[i]).distance;
            if (d < best) { best = d; target = i; }
        }
        Vec2 p0 = anchor;
        if (!point_in_closed_curve(p0, gamma.components[target])) {
            p0 = Vec2::Zero();  // fall back to the component centroid
            for (const Vec2& q : gamma.components[target].samples) p0 += q;
            p0 /= gamma.components[target].size();
        }
        double best_score = -1.0;
        std::optional<IdealCurve> best_arc;
        for (int a = 0; a < 36; ++a) {
            const double theta = 2.0 * M_PI * a / 36.0;
            // off-center chord: split a side lobe off rather than halving the
            // component, so a ball about the origin still recovers the
            // previous stage from the surviving main dome
            const Vec2 n(-std::sin(theta), std::cos(theta));
            const IdealCurve& tc = gamma.components[target];
            double rho = std::numeric_limits<double>::infinity();
            for (int i = 0; i < tc.size(); ++i) {
                const Vec2 a0 = tc.at(i), b0 = tc.at(i + 1), e = b0 - a0;
                const double det = n.x() * (-e.y()) - n.y() * (-e.x());
                if (std::abs(det) < 1e-14) continue;
                const Vec2 r = a0 - p0;
                const double t = (r.x() * (-e.y()) - r.y() * (-e.x())) / det;
                const double u = (n.x() * r.y() - n.y() * r.x()) / det;
                if (u < 0.0 || u > 1.0 || t <= 1e-9) continue;
                rho = std::min(rho, t);
            }
            if (!std::isfinite(rho)) continue;
            auto arc = detail::chord_arc(gamma, target, p0 + 0.5 * rho * n, theta);
            if (!arc) continue;
            BridgeArc alpha;
            alpha.arc = *arc;
            if (!validate_bridge(gamma, alpha).ok()) continue;
            const double score = detail::arc_clearance(gamma, *arc);
            if (score > best_score) { best_score = score; best_arc = std::move(*arc); }
        }
        if (!best_arc) throw ExecutionError(stage, "no valid splitting chord found");
        return *best_arc;
    };

    for (size_t i = 0; i < prog.steps.size(); ++i) {
        const ProgramStep& step = prog.steps[i];
        StageRecord rec;
        rec.index = static_cast<int>(i);
        rec.kind = step.kind;
        rec.predicted = step.predicted;
        switch (step.kind) {
            case StepKind::SeedDisk: {
                gamma.components = {make_circle(step.center, step.radius)};
                cur = solve_plateau(gamma, H, std::nullopt, exec_cfg);
                finish_stage(rec, step.predicted, false);
                break;
            }
            case StepKind::AttachBridge: {
                if (step.to_plane) {
                    // fused with the next AttachPlane step: merge the fresh
                    // plane disk into the surface through this bridge
                    if (i + 1 >= prog.steps.size() ||
                        prog.steps[i + 1].kind != StepKind::AttachPlane)
                        throw ExecutionError(rec.index, "to_plane bridge without a plane step");
                    const ProgramStep& plane = prog.steps[i + 1];
                    IdealCurveSet joint = gamma;
                    joint.components.push_back(make_circle(plane.center, plane.radius));
                    orient_by_nesting(joint);
                    const TruncatedMesh cap = mesh_cap(
                        cap_through_ring(plane.center, plane.radius, exec_cfg.z_cut, H),
                        exec_cfg.z_cut, 64, 160);
                    SolveResult base;
                    base.mesh = detail::concat_meshes(cur.mesh, cap);
                    base.H = H;
                    const int circle_comp = joint.count() - 1;
                    Vec2 p = step.anchor;
                    Vec2 a = p, b = p;
                    for (int it = 0; it < 4; ++it) {
                        double bd = std::numeric_limits<double>::infinity();
                        for (int c = 0; c < circle_comp; ++c) {
                            const NearestHit h = nearest_on_curve(p, joint.components[c]);
                            if (h.distance < bd) { bd = h.distance; a = h.point; }
                        }
                        b = nearest_on_curve(p, joint.components[circle_comp]).point;
                        p = 0.5 * (a + b);
                    }
                    IdealCurve arc;
                    arc.closed = false;
                    for (int s = 0; s < 200; ++s)
                        arc.samples.push_back(a + (b - a) * (s / 199.0));
                    gamma = joint;
                    const double t = run_continuation(rec.index, joint, arc, base, rec);
                    last_plane_arc = arc;
                    last_plane_t = t;
                    finish_stage(rec, step.predicted, true);
                    // the plane step shares the fused result
                    StageRecord prec;
                    prec.index = static_cast<int>(i + 1);
                    prec.kind = StepKind::AttachPlane;
                    prec.predicted = plane.predicted;
                    prec.t_level = t;
                    finish_stage(prec, plane.predicted, false);
                    ++i;
                } else {
                    const IdealCurve arc = best_chord(rec.index, step.anchor);
                    run_continuation(rec.index, gamma, arc, cur, rec);
                    finish_stage(rec, step.predicted, true);
                }
                break;
            }
            case StepKind::AttachHandle: {
                // two bridges: a splitting chord, then the perpendicular
                // merge across the chord's midpoint joining the two sides
                const IdealCurve chord = best_chord(rec.index, step.anchor);
                const Vec2 mid = chord.samples[chord.size() / 2];
                StageRecord sub;
                run_continuation(rec.index, gamma, chord, cur, sub);
                rec.notes.push_back("split level t = " + std::to_string(sub.t_level));
                int ca = 0, cb = 1;
                {
                    std::vector<std::pair<double, int>> by_dist;
                    for (int c = 0; c < gamma.count(); ++c)
                        by_dist.push_back({nearest_on_curve(mid, gamma.components[c]).distance, c});
                    std::sort(by_dist.begin(), by_dist.end());
                    ca = by_dist[0].second;
                    cb = by_dist[1].second;
                }
                const IdealCurve back = detail::perpendicular_arc(gamma, ca, cb, mid);
                run_continuation(rec.index, gamma, back, cur, rec);
                finish_stage(rec, step.predicted, true);
                break;
            }
            case StepKind::AttachPlane:
                // executes fused with its bridge; standalone occurrence is a
                // malformed program
                throw ExecutionError(rec.index, "AttachPlane without a preceding to_plane bridge");
            case StepKind::InstallIgloo: {
                ShellObstacle shell;
                shell.center = Vec3(step.center.x(), step.center.y(), 0.0);
                shell.R = step.radius;
                shell.thickness = step.shell_thickness;
                shell.door_center = Vec3(step.anchor.x(), step.anchor.y(), 0.0);
                shell.door_radius = step.door_radius;
                const ObstacleRegion region = shell;
                for (const Vec3& pv : cur.mesh.vertices)
                    if (detail::obstacle_contains(region, pv))
                        throw ExecutionError(rec.index, "current surface meets the new igloo shell");
                exec_cfg.obstacles.push_back(region);
                SolverConfig warm = exec_cfg;
                warm.max_iterations = std::min(exec_cfg.max_iterations, 400);
                cur = solve_plateau_mesh(cur.mesh, H, warm);
                finish_stage(rec, step.predicted, false);
                break;
            }
            case StepKind::InstallTunnel: {
                if (last_plane_arc.size() == 0)
                    throw ExecutionError(rec.index, "no bridge arc recorded for the tunnel");
                HalfCylinderObstacle tun;
                const int n = last_plane_arc.size();
                tun.p0 = last_plane_arc.samples[n * 3 / 10];
                tun.p1 = last_plane_arc.samples[n * 7 / 10];
                tun.radius = 0.4 * last_plane_t;
                const ObstacleRegion region = tun;
                exec_cfg.obstacles.push_back(region);
                SolverConfig warm = exec_cfg;
                warm.max_iterations = std::min(exec_cfg.max_iterations, 400);
                cur = solve_plateau_mesh(cur.mesh, H, warm);
                for (const Vec3& pv : cur.mesh.vertices)
                    if (detail::obstacle_contains(region, pv))
                        throw ExecutionError(rec.index, "surface penetrates the tunnel barrier");
                finish_stage(rec, step.predicted, false);
                break;
            }
        }
    }
    return records;
}

// ---------------------------------------------------------------------------
// Igloo fixture: the tau curve, tunnel circles, doors and the door-separation
// measurement for one separating circle + crossing bridge.

struct IglooFixture {
    IdealCurve tau;                 // single closed boundary curve of the igloo roof
    Vec2 crossing;                  // where the bridge crosses the separator
    Vec2 q_plus, q_minus;           // bridge exits from the epsilon-neighborhood
    Vec2 tunnel_center_plus, tunnel_center_minus;
    double tunnel_radius = 0.0;
    double tunnel_separation = 0.0;       // invariant separation of the tunnel pair
    double tunnel_threshold = 0.0;        // catenoid existence threshold at H = 0
    TiltedHalfPlaneSurf door_plus, door_minus;  // vertical geodesic walls over l+-
    double door_separation = 0.0;   // min distance between the deep door circles
    ShellObstacle obstacle;         // the igloo stand-in for the solver
};

/// Build the igloo data for separator beta, bridge eta and strip half-width
/// delta (neighborhood width epsilon = 4 delta). eta must cross beta once.
inline IglooFixture igloo_fixture(const IdealCurve& beta, const IdealCurve& eta, double delta) {
    if (!beta.closed || beta.size() < 8)
        throw std::invalid_argument("igloo_fixture: beta must be a closed curve");
    if (eta.closed || eta.size() < 4)
        throw std::invalid_argument("igloo_fixture: eta must be an open arc");
    if (delta <= 0.0) throw std::invalid_argument("igloo_fixture: delta > 0 required");
    const double eps = 4.0 * delta;

    // locate the single crossing as the parity flip along eta
    int crossings = 0;
    Vec2 x = Vec2::Zero();
    bool prev_in = point_in_closed_curve(eta.samples[0], beta);
    for (int i = 1; i < eta.size(); ++i) {
        const bool in = point_in_closed_curve(eta.samples[i], beta);
        if (in != prev_in) {
            ++crossings;
            // refine on the beta polygon
            const Vec2 a = eta.samples[i - 1], b = eta.samples[i];
            double lo = 0.0, hi = 1.0;
            for (int it = 0; it < 40; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (point_in_closed_curve(a + mid * (b - a), beta) == prev_in)
                    lo = mid;
                else
                    hi = mid;
            }
            x = a + 0.5 * (lo + hi) * (b - a);
        }
        prev_in = in;
    }
    if (crossings != 1)
        throw std::invalid_argument("igloo_fixture: eta must cross beta exactly once");

    IglooFixture out;
    out.crossing = x;

    // exits of eta from the eps-neighborhood of beta, walking from the crossing
    auto exit_point = [&](int dir) {
        // walk samples in the given direction from the nearest sample to x
        int i0 = 0;
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < eta.size(); ++i) {
            const double d = (eta.samples[i] - x).squaredNorm();
            if (d < best) { best = d; i0 = i; }
        }
        Vec2 prev = eta.samples[i0];
        for (int i = i0 + dir; i >= 0 && i < eta.size(); i += dir) {
            const Vec2 q = eta.samples[i];
            if (nearest_on_curve(q, beta).distance >= eps) {
                double lo = 0.0, hi = 1.0;  // crossing of dist = eps on [prev, q]
                for (int it = 0; it < 40; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    if (nearest_on_curve(prev + mid * (q - prev), beta).distance < eps)
                        lo = mid;
                    else
                        hi = mid;
                }
                return std::optional<Vec2>(prev + 0.5 * (lo + hi) * (q - prev));
            }
            prev = q;
        }
        return std::optional<Vec2>();
    };
    const auto e0 = exit_point(-1), e1 = exit_point(+1);
    if (!e0 || !e1)
        throw std::invalid_argument("igloo_fixture: eta does not leave the neighborhood of beta");
    const bool e0_in = point_in_closed_curve(*e0, beta);
    out.q_minus = e0_in ? *e0 : *e1;  // inner exit
    out.q_plus = e0_in ? *e1 : *e0;   // outer exit

    // tau = boundary of {dist(beta) < eps} minus the delta-strip around eta
    auto field = [&](const Vec2& p) {
        const double db = nearest_on_curve(p, beta).distance;
        const double de = nearest_on_curve(p, eta).distance;
        return std::min(eps - db, de - delta);
    };
    std::vector<Vec2> seeds;
    for (int i = 0; i < beta.size(); i += std::max(1, beta.size() / 128)) {
        const Vec2 t = beta.tangent(i);
        const Vec2 n(-t.y(), t.x());
        seeds.push_back(beta.samples[i] + eps * n);
        seeds.push_back(beta.samples[i] - eps * n);
    }
    for (int i = 0; i < eta.size(); i += std::max(1, eta.size() / 64)) {
        const Vec2 t = eta.tangent(i);
        const Vec2 n(-t.y(), t.x());
        seeds.push_back(eta.samples[i] + delta * n);
        seeds.push_back(eta.samples[i] - delta * n);
    }
    std::vector<IdealCurve> loops = extract_level_set(field, 0.0, seeds, 0.5 * delta, 512);
    if (loops.size() != 1)
        throw std::runtime_error("igloo_fixture: tau is not a single closed curve");
    out.tau = loops[0];

    // tunnel mouths along beta on either side of the crossing; a catenoid
    // over a disjoint side-by-side pair exists only when the invariant
    // separation stays below the H = 0 threshold (~1.0), which needs mouths
    // much wider than the gap between them: edge gap 2 delta, radius 10 delta
    const NearestHit foot = nearest_on_curve(x, beta);
    const Vec2 tb = beta.tangent(foot.segment);
    out.tunnel_radius = 10.0 * delta;
    out.tunnel_center_plus = x + (out.tunnel_radius + delta) * tb;
    out.tunnel_center_minus = x - (out.tunnel_radius + delta) * tb;
    {
        // arccosh of the inversive distance, the Moebius invariant of the pair
        const double D2 = (out.tunnel_center_plus - out.tunnel_center_minus).squaredNorm();
        const double r2 = out.tunnel_radius * out.tunnel_radius;
        out.tunnel_separation = std::acosh((D2 - 2.0 * r2) / (2.0 * r2));
    }
    out.tunnel_threshold = catenoid_existence_threshold(0.0);

    // doors: vertical geodesic walls over the tangent lines at the exits
    auto door_at = [&](const Vec2& q) {
        const NearestHit h = nearest_on_curve(q, beta);
        return tilted_halfplane(q, beta.tangent(h.segment), 0.0);
    };
    out.door_plus = door_at(out.q_plus);
    out.door_minus = door_at(out.q_minus);

    // deep coaxial circles on the doors: centered over the exits at height
    // delta^2, almost touching the ideal boundary, so their separation blows
    // up as delta shrinks
    const double zc = delta * delta, rho = (1.0 - delta) * zc;
    auto circle_points = [&](const TiltedHalfPlaneSurf& door, const Vec2& q) {
        std::vector<Vec3> pts;
        for (int i = 0; i < 128; ++i) {
            const double th = 2.0 * M_PI * i / 128;
            const Vec2 g = q + rho * std::cos(th) * door.direction;
            pts.emplace_back(g.x(), g.y(), zc + rho * std::sin(th));
        }
        return pts;
    };
    const auto zp = circle_points(out.door_plus, out.q_plus);
    const auto zm = circle_points(out.door_minus, out.q_minus);
    double dmin = std::numeric_limits<double>::infinity();
    for (const Vec3& p : zp)
        for (const Vec3& q : zm) dmin = std::min(dmin, hyperbolic_distance_uhs(p, q));
    out.door_separation = dmin;

    // the obstacle stand-in: a shell over beta's mean circle with the door
    // opened where the bridge crosses
    Vec2 cen = Vec2::Zero();
    for (const Vec2& p : beta.samples) cen += p;
    cen /= beta.size();
    double rmean = 0.0;
    for (const Vec2& p : beta.samples) rmean += (p - cen).norm();
    rmean /= beta.size();
    out.obstacle.center = Vec3(cen.x(), cen.y(), 0.0);
    out.obstacle.R = rmean;
    out.obstacle.thickness = std::min(0.04, 0.5 * eps);
    const Vec2 dc = cen + rmean * (x - cen).normalized();
    out.obstacle.door_center = Vec3(dc.x(), dc.y(), 0.0);
    out.obstacle.door_radius = std::max(3.0 * delta, 1.5 * eps);
    return out;
}

}  // namespace hsurf

#endif  // HSURF_BUILDER_HPP
