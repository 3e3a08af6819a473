#pragma once

#include <afem/errors.hpp>
#include <afem/geometry.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace afem {

/**
 * A triangle of a Triangulation. Local edge k is the edge opposite vertices[k],
 * i.e. it joins vertices[(k+1)%3] and vertices[(k+2)%3]. The refinement edge is
 * the edge split by newest-vertex bisection.
 */
struct Cell
{
    std::array<int, 3> vertices{};
    int refinement_edge = 0;
    int generation = 0;

    friend bool operator==(const Cell &, const Cell &) = default;
};

struct Edge
{
    std::array<int, 2> vertices{};
    /// Incident cells; triangles[1] == -1 on the boundary.
    std::array<int, 2> triangles{-1, -1};
    /// Local edge index of this edge within each incident cell.
    std::array<int, 2> local{-1, -1};

    bool on_boundary() const { return triangles[1] < 0; }
};

/// Sentinel for "no parent" in Triangulation::vertex_parents().
inline constexpr std::array<int, 2> no_parents{-1, -1};

/**
 * Immutable conforming triangulation with edge adjacency and vertex incidence.
 *
 * Vertices created by bisection remember the endpoints of the edge they split,
 * which allows nodal prolongation of piecewise affine functions onto a refined mesh.
 */
class Triangulation
{
public:
    Triangulation() = default;

    /**
     * Builds the topology and validates index ranges, orientation and the
     * two-cells-per-edge limit. An empty boundary vector means the flags are
     * derived from the edges with a single incident cell.
     */
    Triangulation(std::vector<Point2> vertices,
                  std::vector<bool> boundary,
                  std::vector<Cell> cells,
                  std::vector<std::array<int, 2>> vertex_parents = {})
        : _vertices(std::move(vertices)), _cells(std::move(cells)), _vertex_parents(std::move(vertex_parents))
    {
        const auto nv = _vertices.size();
        if (_vertex_parents.empty()) _vertex_parents.assign(nv, no_parents);
        if (_vertex_parents.size() != nv) throw InputError("vertex parent list has wrong size");
        for (const auto & p : _vertices)
            if (!is_finite(p)) throw InputError("mesh vertex " + to_string(p) + " is not finite");
        for (std::size_t t = 0; t < _cells.size(); ++t)
        {
            const auto & c = _cells[t];
            for (int v : c.vertices)
                if (v < 0 || static_cast<std::size_t>(v) >= nv)
                    throw InputError("triangle " + std::to_string(t) + " references invalid vertex "
                                     + std::to_string(v));
            if (c.refinement_edge < 0 || c.refinement_edge > 2)
                throw InputError("triangle " + std::to_string(t) + " has invalid refinement edge");
            if (!(orient2d(point(c.vertices[0]), point(c.vertices[1]), point(c.vertices[2])) > 0.0))
                throw InputError("triangle " + std::to_string(t) + " is not positively oriented");
        }
        build_topology();

        if (boundary.empty())
        {
            _boundary.assign(nv, 0);
            for (const auto & e : _edges)
                if (e.on_boundary()) _boundary[e.vertices[0]] = _boundary[e.vertices[1]] = 1;
        }
        else
        {
            if (boundary.size() != nv) throw InputError("boundary flag list has wrong size");
            _boundary.assign(boundary.begin(), boundary.end());
        }
    }

    std::size_t num_vertices() const { return _vertices.size(); }
    std::size_t num_triangles() const { return _cells.size(); }
    std::size_t num_edges() const { return _edges.size(); }

    const std::vector<Point2> & vertices() const { return _vertices; }
    const std::vector<Cell> & cells() const { return _cells; }
    const std::vector<Edge> & edges() const { return _edges; }
    const std::vector<std::array<int, 2>> & vertex_parents() const { return _vertex_parents; }

    Point2 point(int v) const { return _vertices[v]; }
    const Cell & cell(int t) const { return _cells[t]; }
    const Edge & edge(int e) const { return _edges[e]; }
    bool is_boundary_vertex(int v) const { return _boundary[v] != 0; }

    /// Global edge index of local edge k of triangle t.
    int cell_edge(int t, int k) const { return _cell_edges[t][k]; }
    const std::array<int, 3> & cell_edges(int t) const { return _cell_edges[t]; }

    /// Cell across local edge k of t, or -1 on the boundary.
    int neighbor(int t, int k) const
    {
        const auto & e = _edges[_cell_edges[t][k]];
        if (e.on_boundary()) return -1;
        return e.triangles[0] == t ? e.triangles[1] : e.triangles[0];
    }

    std::span<const int> vertex_triangles(int v) const
    {
        return {_vertex_cells.data() + _vertex_cell_offsets[v],
                static_cast<std::size_t>(_vertex_cell_offsets[v + 1] - _vertex_cell_offsets[v])};
    }

    std::array<Point2, 3> corners(int t) const
    {
        const auto & c = _cells[t].vertices;
        return {_vertices[c[0]], _vertices[c[1]], _vertices[c[2]]};
    }

    double area(int t) const
    {
        const auto p = corners(t);
        return signed_area(p[0], p[1], p[2]);
    }

    /// Local mesh size h_T = |T|^{1/2}.
    double meshsize(int t) const { return std::sqrt(area(t)); }

    double edge_length(int e) const
    {
        return distance(_vertices[_edges[e].vertices[0]], _vertices[_edges[e].vertices[1]]);
    }

    double total_area() const
    {
        double sum = 0.0;
        for (std::size_t t = 0; t < _cells.size(); ++t) sum += area(static_cast<int>(t));
        return sum;
    }

    /// Same vertices, flags and connectivity (generation and ancestry ignored).
    bool same_connectivity(const Triangulation & other) const
    {
        if (_vertices != other._vertices || _boundary != other._boundary) return false;
        if (_cells.size() != other._cells.size()) return false;
        for (std::size_t t = 0; t < _cells.size(); ++t)
            if (_cells[t].vertices != other._cells[t].vertices
                || _cells[t].refinement_edge != other._cells[t].refinement_edge)
                return false;
        return true;
    }

    static std::uint64_t edge_key(int a, int b)
    {
        if (a > b) std::swap(a, b);
        return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
    }

private:
    void build_topology()
    {
        const std::size_t nt = _cells.size();
        _cell_edges.assign(nt, {-1, -1, -1});
        _edges.clear();
        _edges.reserve(nt * 3 / 2 + 4);
        std::unordered_map<std::uint64_t, int> lookup;
        lookup.reserve(nt * 2 + 4);
        for (std::size_t t = 0; t < nt; ++t)
        {
            const auto & v = _cells[t].vertices;
            for (int k = 0; k < 3; ++k)
            {
                const int a = v[(k + 1) % 3];
                const int b = v[(k + 2) % 3];
                auto [it, inserted] = lookup.try_emplace(edge_key(a, b), static_cast<int>(_edges.size()));
                if (inserted)
                {
                    Edge e;
                    e.vertices = {a, b};
                    e.triangles = {static_cast<int>(t), -1};
                    e.local = {k, -1};
                    _edges.push_back(e);
                }
                else
                {
                    auto & e = _edges[it->second];
                    if (e.triangles[1] >= 0)
                        throw InputError("edge (" + std::to_string(a) + ", " + std::to_string(b)
                                         + ") is shared by more than two triangles");
                    if (e.vertices[0] == a)
                        throw InputError("triangles " + std::to_string(e.triangles[0]) + " and "
                                         + std::to_string(t) + " overlap across a shared edge");
                    e.triangles[1] = static_cast<int>(t);
                    e.local[1] = k;
                }
                _cell_edges[t][k] = it->second;
            }
        }

        const std::size_t nv = _vertices.size();
        _vertex_cell_offsets.assign(nv + 1, 0);
        for (const auto & c : _cells)
            for (int v : c.vertices) ++_vertex_cell_offsets[v + 1];
        for (std::size_t v = 0; v < nv; ++v) _vertex_cell_offsets[v + 1] += _vertex_cell_offsets[v];
        _vertex_cells.assign(nt * 3, -1);
        std::vector<int> fill(_vertex_cell_offsets.begin(), _vertex_cell_offsets.end() - 1);
        for (std::size_t t = 0; t < nt; ++t)
            for (int v : _cells[t].vertices) _vertex_cells[fill[v]++] = static_cast<int>(t);
    }

    std::vector<Point2> _vertices;
    std::vector<std::uint8_t> _boundary;
    std::vector<Cell> _cells;
    std::vector<std::array<int, 2>> _vertex_parents;
    std::vector<Edge> _edges;
    std::vector<std::array<int, 3>> _cell_edges;
    std::vector<int> _vertex_cell_offsets;
    std::vector<int> _vertex_cells;
};

/**
 * Picks the longest edge of every cell as refinement edge (lowest local index on ties),
 * then lets a cell adopt its neighbor's refinement edge when that edge is also one of
 * its own longest edges, so that as many interior refinement edges as possible are
 * shared by both incident cells.
 */
inline Triangulation assign_longest_edge_refinement(const Triangulation & mesh)
{
    std::vector<Cell> cells = mesh.cells();
    const double rel = 1e-12;
    const auto lengths = [&](int t) {
        std::array<double, 3> len{};
        for (int k = 0; k < 3; ++k) len[k] = mesh.edge_length(mesh.cell_edge(t, k));
        return len;
    };
    for (std::size_t t = 0; t < cells.size(); ++t)
    {
        const auto len = lengths(static_cast<int>(t));
        cells[t].refinement_edge = static_cast<int>(std::max_element(len.begin(), len.end()) - len.begin());
    }
    for (std::size_t t = 0; t < cells.size(); ++t)
    {
        const int e = mesh.cell_edge(static_cast<int>(t), cells[t].refinement_edge);
        const auto & edge = mesh.edge(e);
        if (edge.on_boundary()) continue;
        const int side = edge.triangles[0] == static_cast<int>(t) ? 1 : 0;
        const int other = edge.triangles[side];
        const int other_local = edge.local[side];
        if (cells[other].refinement_edge == other_local) continue;
        const auto len = lengths(other);
        const double longest = *std::max_element(len.begin(), len.end());
        if (len[other_local] >= longest * (1.0 - rel)) cells[other].refinement_edge = other_local;
    }
    std::vector<bool> boundary(mesh.num_vertices());
    for (std::size_t v = 0; v < boundary.size(); ++v) boundary[v] = mesh.is_boundary_vertex(static_cast<int>(v));
    return Triangulation(mesh.vertices(), std::move(boundary), std::move(cells), mesh.vertex_parents());
}

namespace detail {
    /// Ear clipping of a counterclockwise simple polygon.
    inline std::vector<Cell> ear_clip(const std::vector<Point2> & poly)
    {
        std::vector<int> ring(poly.size());
        for (std::size_t i = 0; i < ring.size(); ++i) ring[i] = static_cast<int>(i);
        std::vector<Cell> cells;
        while (ring.size() > 3)
        {
            bool clipped = false;
            for (std::size_t i = 0; i < ring.size(); ++i)
            {
                const int a = ring[(i + ring.size() - 1) % ring.size()];
                const int b = ring[i];
                const int c = ring[(i + 1) % ring.size()];
                if (!(orient2d(poly[a], poly[b], poly[c]) > 0.0)) continue;
                bool blocked = false;
                for (int v : ring)
                {
                    if (v == a || v == b || v == c) continue;
                    const auto l = barycentric(poly[a], poly[b], poly[c], poly[v]);
                    if (l[0] >= 0.0 && l[1] >= 0.0 && l[2] >= 0.0)
                    {
                        blocked = true;
                        break;
                    }
                }
                if (blocked) continue;
                cells.push_back({{a, b, c}, 0, 0});
                ring.erase(ring.begin() + static_cast<std::ptrdiff_t>(i));
                clipped = true;
                break;
            }
            if (!clipped) throw InputError("polygon could not be triangulated");
        }
        if (!(orient2d(poly[ring[0]], poly[ring[1]], poly[ring[2]]) > 0.0))
            throw InputError("polygon could not be triangulated");
        cells.push_back({{ring[0], ring[1], ring[2]}, 0, 0});
        return cells;
    }
}

/**
 * Initial triangulation of a domain.
 *
 * The builtin square gets 4 triangles meeting at the origin, the builtin L-shape
 * two triangles per quadrant with all diagonals through the reentrant corner.
 * Other polygons are triangulated by ear clipping.
 */
inline Triangulation initial_mesh(const PolygonalDomain & domain)
{
    std::vector<Point2> vertices = domain.vertices();
    std::vector<Cell> cells;
    switch (domain.tag())
    {
    case DomainTag::square:
        vertices.push_back({0.0, 0.0});
        for (int i = 0; i < 4; ++i) cells.push_back({{i, (i + 1) % 4, 4}, 2, 0});
        break;
    case DomainTag::lshape:
        cells = {{{0, 1, 2}, 0, 0}, {{0, 2, 7}, 0, 0}, {{2, 3, 4}, 0, 0},
                 {{2, 4, 5}, 0, 0}, {{7, 2, 6}, 0, 0}, {{2, 5, 6}, 0, 0}};
        break;
    case DomainTag::custom:
        cells = detail::ear_clip(vertices);
        break;
    }
    std::vector<bool> boundary(vertices.size(), true);
    if (domain.tag() == DomainTag::square) boundary.back() = false;
    return assign_longest_edge_refinement(Triangulation(std::move(vertices), std::move(boundary), std::move(cells)));
}

/**
 * Refines the marked cells by two successive newest-vertex bisections, so that all
 * three of their edges are halved, and closes the result by bisecting further cells
 * until no hanging nodes remain.
 *
 * Edges to split are collected first: all edges of marked cells, then, repeatedly,
 * the refinement edge of every cell having some edge to split. Each cell is then
 * bisected at its refinement edge and its children again when their refinement edge
 * (one of the parent's other edges) is to be split. Children are [m, p, q] and
 * [m, r, p] for a parent [p, q, r] with refinement edge (q, r) and midpoint m; the
 * refinement edge of each child is the edge opposite m.
 */
inline Triangulation bisect(const Triangulation & mesh, std::span<const int> marked)
{
    const auto nt = mesh.num_triangles();
    const auto ne = mesh.num_edges();
    std::vector<std::uint8_t> split(ne, 0);
    std::vector<int> queue;
    for (int t : marked)
    {
        if (t < 0 || static_cast<std::size_t>(t) >= nt)
            throw std::out_of_range("marked triangle " + std::to_string(t) + " does not exist");
        for (int e : mesh.cell_edges(t))
        {
            if (split[e]) continue;
            split[e] = 1;
            for (int c : mesh.edge(e).triangles)
                if (c >= 0) queue.push_back(c);
        }
    }
    if (queue.empty()) return mesh;

    // closure: a cell with an edge to split must split its refinement edge first
    const std::size_t cap = 4 * (nt + ne) + 16;
    std::size_t steps = 0;
    while (!queue.empty())
    {
        if (++steps > cap) throw NumericalError("bisection closure did not terminate");
        const int t = queue.back();
        queue.pop_back();
        const int re = mesh.cell_edge(t, mesh.cell(t).refinement_edge);
        if (split[re]) continue;
        split[re] = 1;
        for (int c : mesh.edge(re).triangles)
            if (c >= 0 && c != t) queue.push_back(c);
    }

    std::vector<Point2> vertices = mesh.vertices();
    std::vector<bool> boundary(vertices.size());
    for (std::size_t v = 0; v < boundary.size(); ++v) boundary[v] = mesh.is_boundary_vertex(static_cast<int>(v));
    std::vector<std::array<int, 2>> parents = mesh.vertex_parents();

    std::unordered_map<std::uint64_t, int> midpoint_of;
    for (std::size_t e = 0; e < ne; ++e)
    {
        if (!split[e]) continue;
        const auto & edge = mesh.edge(static_cast<int>(e));
        const int m = static_cast<int>(vertices.size());
        vertices.push_back(midpoint(mesh.point(edge.vertices[0]), mesh.point(edge.vertices[1])));
        boundary.push_back(edge.on_boundary());
        parents.push_back(edge.vertices);
        midpoint_of.emplace(Triangulation::edge_key(edge.vertices[0], edge.vertices[1]), m);
    }

    std::vector<Cell> cells;
    cells.reserve(nt + 2 * midpoint_of.size() + 4);
    const auto refine = [&](auto && self, const Cell & c) -> void {
        const int k = c.refinement_edge;
        const int p = c.vertices[k];
        const int q = c.vertices[(k + 1) % 3];
        const int r = c.vertices[(k + 2) % 3];
        const auto it = midpoint_of.find(Triangulation::edge_key(q, r));
        if (it == midpoint_of.end())
        {
            cells.push_back(c);
            return;
        }
        const int m = it->second;
        self(self, Cell{{m, p, q}, 0, c.generation + 1});
        self(self, Cell{{m, r, p}, 0, c.generation + 1});
    };
    for (const auto & c : mesh.cells()) refine(refine, c);

    return Triangulation(std::move(vertices), std::move(boundary), std::move(cells), std::move(parents));
}

inline Triangulation bisect(const Triangulation & mesh, std::initializer_list<int> marked)
{
    return bisect(mesh, std::span<const int>(marked.begin(), marked.size()));
}

inline Triangulation refine_uniformly(const Triangulation & mesh)
{
    std::vector<int> all(mesh.num_triangles());
    for (std::size_t t = 0; t < all.size(); ++t) all[t] = static_cast<int>(t);
    return bisect(mesh, all);
}

struct Star
{
    int center = -1;
    std::vector<int> triangles;
};

inline Star star(const Triangulation & mesh, int z)
{
    const auto tris = mesh.vertex_triangles(z);
    return {z, std::vector<int>(tris.begin(), tris.end())};
}

enum class PatchKind
{
    /// T and the cells sharing an edge with T.
    side,
    /// T and the cells sharing at least a vertex with T.
    vertex
};

inline std::vector<int> patch(const Triangulation & mesh, int t, PatchKind kind = PatchKind::side)
{
    std::vector<int> out{t};
    if (kind == PatchKind::side)
    {
        for (int k = 0; k < 3; ++k)
            if (const int n = mesh.neighbor(t, k); n >= 0) out.push_back(n);
    }
    else
    {
        for (int v : mesh.cell(t).vertices)
            for (int c : mesh.vertex_triangles(v)) out.push_back(c);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

struct Location
{
    int triangle = -1;
    std::array<double, 3> barycentric{};
};

/// Cells whose closure contains p, up to a barycentric tolerance, in index order.
inline std::vector<int> containing_triangles(const Triangulation & mesh, Point2 p, double tol = 1e-14)
{
    std::vector<int> out;
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t)
    {
        const auto c = mesh.corners(static_cast<int>(t));
        const auto l = barycentric(c[0], c[1], c[2], p);
        if (l[0] >= -tol && l[1] >= -tol && l[2] >= -tol) out.push_back(static_cast<int>(t));
    }
    return out;
}

/**
 * Finds the lowest-index triangle containing p. Barycentric coordinates are clipped
 * to [0,1] and renormalized. Throws InputError if p is outside the mesh.
 */
inline Location locate(const Triangulation & mesh, Point2 p, double tol = 1e-12)
{
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t)
    {
        const auto c = mesh.corners(static_cast<int>(t));
        auto l = barycentric(c[0], c[1], c[2], p);
        if (l[0] >= -tol && l[1] >= -tol && l[2] >= -tol)
        {
            double sum = 0.0;
            for (auto & x : l) sum += (x = std::clamp(x, 0.0, 1.0));
            for (auto & x : l) x /= sum;
            return {static_cast<int>(t), l};
        }
    }
    throw InputError("point " + to_string(p) + " lies outside the mesh");
}

struct MeshMetrics
{
    double h_min = 0.0;
    double h_max = 0.0;
    /// Smallest interior angle, radians.
    double min_angle = 0.0;
    double min_area = 0.0;

    double min_angle_degrees() const { return min_angle * 180.0 / std::numbers::pi; }
};

inline MeshMetrics mesh_metrics(const Triangulation & mesh)
{
    MeshMetrics m;
    m.h_min = m.min_area = m.min_angle = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t)
    {
        const double a = mesh.area(static_cast<int>(t));
        const double h = std::sqrt(a);
        m.h_min = std::min(m.h_min, h);
        m.h_max = std::max(m.h_max, h);
        m.min_area = std::min(m.min_area, a);
        const auto c = mesh.corners(static_cast<int>(t));
        for (double angle : interior_angles(c[0], c[1], c[2])) m.min_angle = std::min(m.min_angle, angle);
    }
    return m;
}

/**
 * Checks the invariants a refined mesh must satisfy beyond what the constructor
 * enforces: no hanging nodes and consistent boundary flags. Returns a list of
 * violations, empty when the mesh is valid.
 */
inline std::vector<std::string> check_invariants(const Triangulation & mesh)
{
    std::vector<std::string> problems;
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t)
        if (!(mesh.area(static_cast<int>(t)) > 0.0))
            problems.push_back("triangle " + std::to_string(t) + " has nonpositive area");

    std::vector<int> order(mesh.num_vertices());
    for (std::size_t v = 0; v < order.size(); ++v) order[v] = static_cast<int>(v);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return mesh.point(a).x < mesh.point(b).x; });

    for (std::size_t e = 0; e < mesh.num_edges(); ++e)
    {
        const auto & edge = mesh.edge(static_cast<int>(e));
        if (!edge.on_boundary()) continue;
        const int a = edge.vertices[0];
        const int b = edge.vertices[1];
        if (!mesh.is_boundary_vertex(a) || !mesh.is_boundary_vertex(b))
            problems.push_back("boundary edge " + std::to_string(e) + " has an endpoint not flagged as boundary");
        const Point2 pa = mesh.point(a);
        const Point2 pb = mesh.point(b);
        const double xlo = std::min(pa.x, pb.x);
        const double xhi = std::max(pa.x, pb.x);
        auto it = std::lower_bound(order.begin(), order.end(), xlo,
                                   [&](int v, double x) { return mesh.point(v).x < x; });
        const double len = distance(pa, pb);
        for (; it != order.end() && mesh.point(*it).x <= xhi; ++it)
        {
            const int v = *it;
            if (v == a || v == b) continue;
            const Point2 p = mesh.point(v);
            if (std::abs(orient2d(pa, pb, p)) <= 1e-12 * len * len && dot(p - pa, pb - pa) > 0.0
                && dot(p - pb, pa - pb) > 0.0)
                problems.push_back("hanging node " + std::to_string(v) + " on edge " + std::to_string(e));
        }
    }
    for (std::size_t v = 0; v < mesh.num_vertices(); ++v)
        if (mesh.vertex_triangles(static_cast<int>(v)).empty())
            problems.push_back("vertex " + std::to_string(v) + " belongs to no triangle");
    return problems;
}

} // namespace afem
