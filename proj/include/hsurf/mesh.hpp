#ifndef HSURF_MESH_HPP
#define HSURF_MESH_HPP

#include <hsurf/geometry.hpp>

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

// Truncated surface meshes in the upper half-space: hyperbolic area, the
// enclosed-volume functional, the functional A + 2HV, discrete mean
// curvature, and topology/genus reports.
namespace hsurf {

struct TruncatedMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> triangles;
    std::vector<std::vector<int>> boundary_rings;  // ordered loops, induced orientation
    std::vector<int> ring_curve_tags;              // ideal-curve component per ring (-1 if n/a)
    double z_cut = 0.0;

    int vcount() const { return static_cast<int>(vertices.size()); }
    int fcount() const { return static_cast<int>(triangles.size()); }
};

namespace detail {

inline std::pair<int, int> undirected(int a, int b) { return a < b ? std::pair{a, b} : std::pair{b, a}; }

}  // namespace detail

struct MeshValidation {
    bool manifold = false;
    bool oriented = false;
    bool rings_match_boundary = false;
    bool heights_ok = false;
    double min_angle_deg = 0.0;
    std::vector<std::string> violations;

    bool ok() const { return manifold && oriented && rings_match_boundary && heights_ok; }
};

/// Directed boundary edges a->b (appearing in exactly one triangle) chained
/// into loops; this is the induced boundary orientation.
inline std::vector<std::vector<int>> boundary_loops(const TruncatedMesh& m) {
    std::map<std::pair<int, int>, int> count;  // directed edge -> multiplicity
    for (const auto& t : m.triangles)
        for (int e = 0; e < 3; ++e) count[{t[e], t[(e + 1) % 3]}]++;
    std::map<int, int> next;  // boundary successor
    for (const auto& [edge, c] : count) {
        if (c != 1) throw std::invalid_argument("duplicated directed edge (non-manifold or unoriented)");
        if (!count.count({edge.second, edge.first})) {
            if (next.count(edge.first))
                throw std::invalid_argument("pinched boundary vertex (two outgoing boundary edges)");
            next[edge.first] = edge.second;
        }
    }
    std::vector<std::vector<int>> loops;
    std::set<int> seen;
    for (const auto& [start, _] : next) {
        if (seen.count(start)) continue;
        std::vector<int> loop;
        int v = start;
        do {
            loop.push_back(v);
            seen.insert(v);
            auto it = next.find(v);
            if (it == next.end()) throw std::invalid_argument("open boundary chain");
            v = it->second;
        } while (v != start);
        loops.push_back(std::move(loop));
    }
    return loops;
}

inline MeshValidation validate_mesh(const TruncatedMesh& m, bool check_ring_height = true) {
    MeshValidation v;
    std::map<std::pair<int, int>, int> undirected_count;
    std::map<std::pair<int, int>, int> directed_count;
    for (const auto& t : m.triangles) {
        for (int e = 0; e < 3; ++e) {
            undirected_count[detail::undirected(t[e], t[(e + 1) % 3])]++;
            directed_count[{t[e], t[(e + 1) % 3]}]++;
        }
    }
    v.manifold = true;
    for (const auto& [edge, c] : undirected_count)
        if (c > 2) { v.manifold = false; v.violations.push_back("edge with >2 triangles"); break; }
    v.oriented = true;
    for (const auto& [edge, c] : directed_count)
        if (c > 1) { v.oriented = false; v.violations.push_back("inconsistent orientation"); break; }

    // declared rings must cover exactly the boundary edges, in induced order
    v.rings_match_boundary = true;
    if (v.manifold && v.oriented) {
        std::set<std::pair<int, int>> boundary_directed;
        for (const auto& [edge, c] : directed_count)
            if (!directed_count.count({edge.second, edge.first})) boundary_directed.insert(edge);
        std::set<std::pair<int, int>> declared;
        for (const auto& ring : m.boundary_rings)
            for (size_t i = 0; i < ring.size(); ++i)
                declared.insert({ring[i], ring[(i + 1) % ring.size()]});
        if (declared != boundary_directed) {
            v.rings_match_boundary = false;
            v.violations.push_back("declared rings do not match mesh boundary");
        }
    }

    v.heights_ok = true;
    for (const Vec3& p : m.vertices)
        if (p.z() < m.z_cut - 1e-12) { v.heights_ok = false; v.violations.push_back("vertex below z_cut"); break; }
    if (check_ring_height)
        for (const auto& ring : m.boundary_rings)
            for (int i : ring)
                if (std::abs(m.vertices[i].z() - m.z_cut) > 1e-12) {
                    v.heights_ok = false;
                    v.violations.push_back("ring vertex off z_cut");
                    goto done_heights;
                }
done_heights:

    v.min_angle_deg = 180.0;
    for (const auto& t : m.triangles) {
        for (int e = 0; e < 3; ++e) {
            const Vec3 a = m.vertices[t[(e + 1) % 3]] - m.vertices[t[e]];
            const Vec3 b = m.vertices[t[(e + 2) % 3]] - m.vertices[t[e]];
            const double ang = std::atan2(a.cross(b).norm(), a.dot(b)) * 180.0 / M_PI;
            v.min_angle_deg = std::min(v.min_angle_deg, ang);
        }
    }
    return v;
}

// ---------------------------------------------------------------------------
// Integrals.

/// Hyperbolic area: per triangle, Euclidean area times the 3-point
/// edge-midpoint average of the density 1/z^2 (exact at constant height).
inline double hyperbolic_area(const TruncatedMesh& m) {
    double total = 0.0;
    for (const auto& t : m.triangles) {
        const Vec3& p0 = m.vertices[t[0]];
        const Vec3& p1 = m.vertices[t[1]];
        const Vec3& p2 = m.vertices[t[2]];
        const double area = 0.5 * (p1 - p0).cross(p2 - p0).norm();
        double dens = 0.0;
        for (int e = 0; e < 3; ++e) {
            const double zm = 0.5 * (m.vertices[t[e]].z() + m.vertices[t[(e + 1) % 3]].z());
            dens += 1.0 / (zm * zm);
        }
        total += area * dens / 3.0;
    }
    return total;
}

namespace detail {

/// Flux of W = (0,0,-1/(2 z^2)) through one oriented triangle; div W = 1/z^3
/// is the hyperbolic volume density, so summing flux over a closed outward-
/// oriented surface gives the enclosed hyperbolic volume.
inline double volume_flux(const Vec3& p0, const Vec3& p1, const Vec3& p2) {
    const double nz = 0.5 * (p1 - p0).cross(p2 - p0).z();  // area-weighted normal z
    double dens = 0.0;
    const Vec3* pts[3] = {&p0, &p1, &p2};
    for (int e = 0; e < 3; ++e) {
        const double zm = 0.5 * (pts[e]->z() + pts[(e + 1) % 3]->z());
        dens += 1.0 / (2.0 * zm * zm);
    }
    return -nz * dens / 3.0;
}

}  // namespace detail

/// Signed hyperbolic volume between m and a reference mesh sharing its ring
/// structure (rings paired by index, vertex by vertex; side walls are added
/// between corresponding ring vertices). Positive when m lies above ref with
/// upward orientation.
inline double enclosed_volume(const TruncatedMesh& m, const TruncatedMesh& ref) {
    if (m.boundary_rings.size() != ref.boundary_rings.size())
        throw std::invalid_argument("enclosed_volume: ring count mismatch");
    for (size_t r = 0; r < m.boundary_rings.size(); ++r)
        if (m.boundary_rings[r].size() != ref.boundary_rings[r].size())
            throw std::invalid_argument("enclosed_volume: ring length mismatch");

    double vol = 0.0;
    for (const auto& t : m.triangles)
        vol += detail::volume_flux(m.vertices[t[0]], m.vertices[t[1]], m.vertices[t[2]]);
    for (const auto& t : ref.triangles)
        vol += detail::volume_flux(ref.vertices[t[2]], ref.vertices[t[1]], ref.vertices[t[0]]);
    for (size_t r = 0; r < m.boundary_rings.size(); ++r) {
        const auto& rm = m.boundary_rings[r];
        const auto& rr = ref.boundary_rings[r];
        const int n = static_cast<int>(rm.size());
        for (int j = 0; j < n; ++j) {
            const Vec3& a = m.vertices[rm[j]];
            const Vec3& b = m.vertices[rm[(j + 1) % n]];
            const Vec3& ra = ref.vertices[rr[j]];
            const Vec3& rb = ref.vertices[rr[(j + 1) % n]];
            if ((a - ra).norm() < 1e-15 && (b - rb).norm() < 1e-15) continue;  // shared ring
            vol += detail::volume_flux(b, a, ra);
            vol += detail::volume_flux(b, ra, rb);
        }
    }
    return vol;
}

/// A + 2HV with the volume oriented consistently with the curvature normal:
/// moving along f z nu changes this by 2 int (h - H) f dA, so surfaces with
/// h = H are exactly its critical points.
inline double i_h_functional(const TruncatedMesh& m, const TruncatedMesh& ref, double H) {
    return hyperbolic_area(m) - 2.0 * H * enclosed_volume(m, ref);
}

// ---------------------------------------------------------------------------
// Discrete mean curvature.

struct CurvatureField {
    std::vector<double> h_hyp;        // hyperbolic mean curvature per vertex
    std::vector<double> h_euc;        // Euclidean mean curvature per vertex
    std::vector<Vec3> normal;         // unit vertex normal (orientation normal)
    std::vector<bool> interior;       // false on boundary-ring vertices
    std::vector<double> mixed_area;   // Meyer mixed Voronoi area
};

/// Discrete mean curvature: cotangent mean-curvature vector with mixed
/// Voronoi areas, H_euc = <−Δp/2, ν> (so a sphere with outward normal has
/// H_euc = +1/R), and the conformal change H_hyp = z·H_euc − ν_z.
inline CurvatureField mean_curvature(const TruncatedMesh& m) {
    const int nv = m.vcount();
    CurvatureField f;
    f.h_hyp.assign(nv, 0.0);
    f.h_euc.assign(nv, 0.0);
    f.normal.assign(nv, Vec3::Zero());
    f.interior.assign(nv, true);
    f.mixed_area.assign(nv, 0.0);
    std::vector<Vec3> lap(nv, Vec3::Zero());  // accumulates sum (cot+cot)(p_j - p_i)

    std::set<int> boundary;
    for (const auto& ring : m.boundary_rings)
        for (int i : ring) boundary.insert(i);
    for (int i : boundary) f.interior[i] = false;

    for (const auto& t : m.triangles) {
        const Vec3& p0 = m.vertices[t[0]];
        const Vec3& p1 = m.vertices[t[1]];
        const Vec3& p2 = m.vertices[t[2]];
        const Vec3 fn = (p1 - p0).cross(p2 - p0);
        const double area = 0.5 * fn.norm();
        if (area <= 0.0) throw std::invalid_argument("degenerate triangle");

        double cot[3];
        bool obtuse[3];
        bool any_obtuse = false;
        for (int e = 0; e < 3; ++e) {
            const Vec3 u = m.vertices[t[(e + 1) % 3]] - m.vertices[t[e]];
            const Vec3 v = m.vertices[t[(e + 2) % 3]] - m.vertices[t[e]];
            cot[e] = u.dot(v) / u.cross(v).norm();
            obtuse[e] = u.dot(v) < 0.0;
            any_obtuse = any_obtuse || obtuse[e];
        }
        for (int e = 0; e < 3; ++e) {
            const int i = t[e], j = t[(e + 1) % 3], k = t[(e + 2) % 3];
            // cot at k is opposite edge (i,j)
            lap[i] += cot[(e + 2) % 3] * (m.vertices[j] - m.vertices[i]);
            lap[j] += cot[(e + 2) % 3] * (m.vertices[i] - m.vertices[j]);
            // angle-weighted vertex normal
            const Vec3 u = m.vertices[j] - m.vertices[i];
            const Vec3 v = m.vertices[k] - m.vertices[i];
            const double ang = std::atan2(u.cross(v).norm(), u.dot(v));
            f.normal[i] += ang * fn.normalized();
            (void)k;
        }
        // Meyer mixed area
        for (int e = 0; e < 3; ++e) {
            const int i = t[e];
            if (!any_obtuse) {
                const Vec3 u = m.vertices[t[(e + 1) % 3]] - m.vertices[i];
                const Vec3 v = m.vertices[t[(e + 2) % 3]] - m.vertices[i];
                f.mixed_area[i] += 0.125 * (u.squaredNorm() * cot[(e + 2) % 3] +
                                            v.squaredNorm() * cot[(e + 1) % 3]);
            } else {
                f.mixed_area[i] += obtuse[e] ? area / 2.0 : area / 4.0;
            }
        }
    }

    for (int i = 0; i < nv; ++i) {
        const double nn = f.normal[i].norm();
        if (nn > 0.0) f.normal[i] /= nn;
        if (!f.interior[i] || f.mixed_area[i] <= 0.0) continue;
        // -Δp/2 = mean curvature vector (H ν for a sphere with outward ν)
        const Vec3 hvec = -lap[i] / (4.0 * f.mixed_area[i]);
        f.h_euc[i] = hvec.dot(f.normal[i]);
        f.h_hyp[i] = m.vertices[i].z() * f.h_euc[i] - f.normal[i].z();
    }
    return f;
}

// ---------------------------------------------------------------------------
// Topology.

struct MeshTopologyReport {
    int V = 0, E = 0, F = 0;
    int euler_characteristic = 0;
    int genus = 0;  // summed over connected components
    int boundary_count = 0;
    int components = 0;
};

inline MeshTopologyReport topology_report(const TruncatedMesh& m) {
    MeshTopologyReport r;
    std::set<int> used;
    std::set<std::pair<int, int>> edges;
    for (const auto& t : m.triangles) {
        for (int e = 0; e < 3; ++e) {
            used.insert(t[e]);
            edges.insert(detail::undirected(t[e], t[(e + 1) % 3]));
        }
    }
    r.V = static_cast<int>(used.size());
    r.E = static_cast<int>(edges.size());
    r.F = m.fcount();
    r.euler_characteristic = r.V - r.E + r.F;
    r.boundary_count = static_cast<int>(boundary_loops(m).size());
    {
        // connected components via union-find over mesh edges
        std::map<int, int> parent;
        for (int v : used) parent[v] = v;
        std::function<int(int)> find = [&](int v) {
            while (parent[v] != v) v = parent[v] = parent[parent[v]];
            return v;
        };
        for (const auto& e : edges) parent[find(e.first)] = find(e.second);
        std::set<int> roots;
        for (int v : used) roots.insert(find(v));
        r.components = static_cast<int>(roots.size());
    }
    // chi = 2C - 2g - k for a disjoint union of compact surfaces with boundary
    const int num = 2 * r.components - r.euler_characteristic - r.boundary_count;
    if (num % 2 != 0)
        throw std::runtime_error("topology_report: non-integer genus (defective mesh)");
    r.genus = num / 2;
    if (r.genus < 0) throw std::runtime_error("topology_report: negative genus");
    return r;
}

/// Keep the part of the mesh with z <= a (triangles cut by the plane z = a,
/// intersection points welded) and return its genus.
inline TruncatedMesh clip_below(const TruncatedMesh& m, double a) {
    TruncatedMesh out;
    out.z_cut = m.z_cut;
    std::map<int, int> old2new;
    auto keep_vertex = [&](int i) {
        auto it = old2new.find(i);
        if (it != old2new.end()) return it->second;
        out.vertices.push_back(m.vertices[i]);
        const int id = out.vcount() - 1;
        old2new[i] = id;
        return id;
    };
    std::map<std::tuple<int64_t, int64_t, int64_t>, int> weld;
    auto cut_vertex = [&](int i, int j) {
        const Vec3& p = m.vertices[i];
        const Vec3& q = m.vertices[j];
        const double u = (a - p.z()) / (q.z() - p.z());
        Vec3 x = p + u * (q - p);
        x.z() = a;
        const auto key = std::make_tuple(static_cast<int64_t>(std::llround(x.x() * 1e10)),
                                         static_cast<int64_t>(std::llround(x.y() * 1e10)),
                                         static_cast<int64_t>(std::llround(x.z() * 1e10)));
        auto it = weld.find(key);
        if (it != weld.end()) return it->second;
        out.vertices.push_back(x);
        const int id = out.vcount() - 1;
        weld[key] = id;
        return id;
    };

    for (const auto& t : m.triangles) {
        bool below[3];
        int nb = 0;
        for (int e = 0; e < 3; ++e) {
            below[e] = m.vertices[t[e]].z() <= a;
            nb += below[e];
        }
        if (nb == 0) continue;
        if (nb == 3) {
            out.triangles.push_back({keep_vertex(t[0]), keep_vertex(t[1]), keep_vertex(t[2])});
            continue;
        }
        // rotate so the pattern starts at a below-vertex run
        int r = 0;
        if (nb == 1) {
            while (!below[r]) ++r;
            const int i = t[r], j = t[(r + 1) % 3], k = t[(r + 2) % 3];
            out.triangles.push_back({keep_vertex(i), cut_vertex(i, j), cut_vertex(i, k)});
        } else {
            while (below[r]) ++r;  // r = the single above-vertex
            const int k = t[r], i = t[(r + 1) % 3], j = t[(r + 2) % 3];
            const int cj = cut_vertex(j, k), ci = cut_vertex(i, k);
            out.triangles.push_back({keep_vertex(i), keep_vertex(j), cj});
            out.triangles.push_back({keep_vertex(i), cj, ci});
        }
    }
    out.boundary_rings = boundary_loops(out);
    out.ring_curve_tags.assign(out.boundary_rings.size(), -1);
    return out;
}

inline int genus_in_slab(const TruncatedMesh& m, double a) {
    if (a <= m.z_cut) throw std::invalid_argument("genus_in_slab: need a > z_cut");
    return topology_report(clip_below(m, a)).genus;
}

// ---------------------------------------------------------------------------
// Refinement (1 -> 4 midpoint split).

inline TruncatedMesh uniform_refine(const TruncatedMesh& m) {
    TruncatedMesh out;
    out.z_cut = m.z_cut;
    out.vertices = m.vertices;
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int i, int j) {
        const auto key = detail::undirected(i, j);
        auto it = midpoint.find(key);
        if (it != midpoint.end()) return it->second;
        out.vertices.push_back(0.5 * (m.vertices[i] + m.vertices[j]));
        const int id = out.vcount() - 1;
        midpoint[key] = id;
        return id;
    };
    for (const auto& t : m.triangles) {
        const int m01 = mid(t[0], t[1]), m12 = mid(t[1], t[2]), m20 = mid(t[2], t[0]);
        out.triangles.push_back({t[0], m01, m20});
        out.triangles.push_back({t[1], m12, m01});
        out.triangles.push_back({t[2], m20, m12});
        out.triangles.push_back({m01, m12, m20});
    }
    for (size_t r = 0; r < m.boundary_rings.size(); ++r) {
        const auto& ring = m.boundary_rings[r];
        std::vector<int> nr;
        const int n = static_cast<int>(ring.size());
        for (int j = 0; j < n; ++j) {
            nr.push_back(ring[j]);
            nr.push_back(mid(ring[j], ring[(j + 1) % n]));
        }
        out.boundary_rings.push_back(std::move(nr));
    }
    out.ring_curve_tags = m.ring_curve_tags;
    return out;
}

}  // namespace hsurf

#endif  // HSURF_MESH_HPP
