#pragma once

#include <afem/fem.hpp>
#include <afem/mesh.hpp>
#include <afem/mesh_io.hpp>
#include <afem/problem.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <span>
#include <vector>

namespace afem {

/// Barycentric tolerance for "x_j lies in the closed star".
inline constexpr double star_tolerance = 1e-14;
/// Absolute coordinate tolerance for "x_j is a Lagrange node".
inline constexpr double node_tolerance = 1e-14;

/**
 * Distance from p to the free Lagrange nodes united with the boundary: interior
 * vertices, plus interior edge midpoints for degree 2, and every boundary edge.
 */
inline double dist_to_nodes(Point2 p, const Triangulation & mesh, int degree = 1)
{
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t v = 0; v < mesh.num_vertices(); ++v)
        if (!mesh.is_boundary_vertex(static_cast<int>(v))) d = std::min(d, distance(p, mesh.point(static_cast<int>(v))));
    for (const auto & e : mesh.edges())
    {
        const Point2 a = mesh.point(e.vertices[0]);
        const Point2 b = mesh.point(e.vertices[1]);
        if (e.on_boundary())
            d = std::min(d, distance_to_segment(p, a, b));
        else if (degree == 2)
            d = std::min(d, distance(p, midpoint(a, b)));
    }
    return d;
}

/// True if p coincides with a free Lagrange node within node_tolerance.
inline bool is_lagrange_node(Point2 p, const Triangulation & mesh, int degree = 1)
{
    const auto close = [&](Point2 q) {
        return std::abs(p.x - q.x) <= node_tolerance && std::abs(p.y - q.y) <= node_tolerance;
    };
    for (std::size_t v = 0; v < mesh.num_vertices(); ++v)
        if (!mesh.is_boundary_vertex(static_cast<int>(v)) && close(mesh.point(static_cast<int>(v)))) return true;
    if (degree == 2)
        for (const auto & e : mesh.edges())
            if (!e.on_boundary() && close(midpoint(mesh.point(e.vertices[0]), mesh.point(e.vertices[1])))) return true;
    return false;
}

/// Sources in the closed star of a vertex, off the Lagrange nodes, split by sign.
struct SignedSourceSets
{
    int vertex = -1;
    std::vector<int> plus;
    std::vector<int> minus;
};

struct OscillationField
{
    std::vector<double> xi;
    double global_xi = 0.0;
};

enum class Sign { plus, minus };

/**
 * Per-source geometric data shared by all oscillation quantities of one mesh:
 * distance to N_hat, node coincidence, and the hat function values lambda_z(x_j)
 * for every vertex z whose closed star contains x_j.
 */
class OscillationContext
{
public:
    struct StarEntry
    {
        int source;
        double hat;
    };

    OscillationContext(const Triangulation & mesh, std::span<const PointSource> sources, int degree = 1)
        : _mesh(mesh), _sources(sources.begin(), sources.end()), _degree(degree)
    {
        _dist.resize(_sources.size());
        _at_node.resize(_sources.size());
        _in_star.resize(mesh.num_vertices());
        _triangles.resize(_sources.size());
        for (std::size_t j = 0; j < _sources.size(); ++j)
        {
            const Point2 x = _sources[j].location;
            _dist[j] = dist_to_nodes(x, mesh, degree);
            _at_node[j] = is_lagrange_node(x, mesh, degree);
            _triangles[j] = containing_triangles(mesh, x, star_tolerance);
            for (int t : _triangles[j])
            {
                const auto c = mesh.corners(t);
                const auto l = barycentric(c[0], c[1], c[2], x);
                for (int k = 0; k < 3; ++k)
                {
                    auto & list = _in_star[mesh.cell(t).vertices[k]];
                    if (!list.empty() && list.back().source == static_cast<int>(j)) continue;
                    list.push_back({static_cast<int>(j), std::clamp(l[k], 0.0, 1.0)});
                }
            }
        }
    }

    const Triangulation & mesh() const { return _mesh; }
    const std::vector<PointSource> & sources() const { return _sources; }
    int degree() const { return _degree; }
    double dist(int j) const { return _dist[j]; }
    bool at_node(int j) const { return _at_node[j]; }
    /// Cells whose closure contains x_j.
    const std::vector<int> & triangles_of(int j) const { return _triangles[j]; }
    /// Sources in the closed star of z with lambda_z at their location.
    const std::vector<StarEntry> & star_sources(int z) const { return _in_star[z]; }

    double hat(int z, int j) const
    {
        for (const auto & e : _in_star[z])
            if (e.source == j) return e.hat;
        return 0.0;
    }

    SignedSourceSets classify(int z) const
    {
        SignedSourceSets s;
        s.vertex = z;
        for (const auto & e : _in_star[z])
        {
            if (_at_node[e.source]) continue;
            (_sources[e.source].weight > 0.0 ? s.plus : s.minus).push_back(e.source);
        }
        return s;
    }

    double sigma(const SignedSourceSets & sets, int j, Sign sign, double theta) const
    {
        const auto & opposite = sign == Sign::plus ? sets.minus : sets.plus;
        if (opposite.empty()) return 0.0;
        double max_dist = 0.0;
        double max_sep = 0.0;
        for (int i : opposite)
        {
            max_dist = std::max(max_dist, std::pow(_dist[i], theta));
            max_sep = std::max(max_sep, std::pow(distance(_sources[j].location, _sources[i].location), theta));
        }
        return std::min(std::pow(_dist[j], theta) + max_dist, max_sep);
    }

    double xi(int z, double theta) const
    {
        if (_mesh.is_boundary_vertex(z))
        {
            double sum = 0.0;
            for (const auto & e : _in_star[z])
                sum += std::pow(_dist[e.source], theta) * std::abs(_sources[e.source].weight) * e.hat;
            return sum;
        }
        const auto sets = classify(z);
        double plus = 0.0;
        for (int j : sets.plus) plus += sigma(sets, j, Sign::plus, theta) * std::abs(_sources[j].weight) * hat(z, j);
        double minus = 0.0;
        for (int j : sets.minus)
            minus += sigma(sets, j, Sign::minus, theta) * std::abs(_sources[j].weight) * hat(z, j);
        return std::min(plus, minus);
    }

private:
    const Triangulation & _mesh;
    std::vector<PointSource> _sources;
    int _degree;
    std::vector<double> _dist;
    std::vector<bool> _at_node;
    std::vector<std::vector<int>> _triangles;
    std::vector<std::vector<StarEntry>> _in_star;
};

inline SignedSourceSets classify_sources(const Triangulation & mesh, std::span<const PointSource> sources, int z,
                                         int degree = 1)
{
    return OscillationContext(mesh, sources, degree).classify(z);
}

/// sigma^{+/-}_{z,j}; zero when the opposite-sign set of z is empty.
inline double sigma(int z, int j, Sign sign, const Triangulation & mesh, std::span<const PointSource> sources,
                    double theta, int degree = 1)
{
    const OscillationContext ctx(mesh, sources, degree);
    return ctx.sigma(ctx.classify(z), j, sign, theta);
}

inline double xi_vertex(const Triangulation & mesh, std::span<const PointSource> sources, int z, double theta,
                        int degree = 1)
{
    return OscillationContext(mesh, sources, degree).xi(z, theta);
}

/// Per-vertex oscillation xi_theta(z) over all vertices and xi_theta = (sum xi^2)^{1/2}.
inline OscillationField xi_global(const Triangulation & mesh, std::span<const PointSource> sources, double theta,
                                  int degree = 1)
{
    const OscillationContext ctx(mesh, sources, degree);
    OscillationField field;
    field.xi.assign(mesh.num_vertices(), 0.0);
    double total = 0.0;
    for (std::size_t z = 0; z < mesh.num_vertices(); ++z)
    {
        if (ctx.star_sources(static_cast<int>(z)).empty()) continue;
        field.xi[z] = ctx.xi(static_cast<int>(z), theta);
        total += field.xi[z] * field.xi[z];
    }
    field.global_xi = std::sqrt(total);
    return field;
}

/**
 * Triangle-indexed bound sum_T h_T^theta (sum_{x_j in omega_T} |alpha_j|) Upsilon(T),
 * with omega_T the vertex patch of T and Upsilon(T) = 0 iff T avoids the boundary and
 * all sources in omega_T have the same sign.
 */
inline double xi_alt_bound(const Triangulation & mesh, std::span<const PointSource> sources, double theta)
{
    std::vector<std::vector<int>> sources_in(mesh.num_triangles());
    for (std::size_t j = 0; j < sources.size(); ++j)
        for (int t : containing_triangles(mesh, sources[j].location, star_tolerance))
            sources_in[t].push_back(static_cast<int>(j));

    double total = 0.0;
    std::vector<int> members;
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t)
    {
        members.clear();
        for (int c : patch(mesh, static_cast<int>(t), PatchKind::vertex))
            members.insert(members.end(), sources_in[c].begin(), sources_in[c].end());
        if (members.empty()) continue;
        std::sort(members.begin(), members.end());
        members.erase(std::unique(members.begin(), members.end()), members.end());

        bool touches_boundary = false;
        for (int v : mesh.cell(static_cast<int>(t)).vertices) touches_boundary |= mesh.is_boundary_vertex(v);
        bool positive = false;
        bool negative = false;
        double weight = 0.0;
        for (int j : members)
        {
            (sources[j].weight > 0.0 ? positive : negative) = true;
            weight += std::abs(sources[j].weight);
        }
        const double upsilon = (!touches_boundary && !(positive && negative)) ? 0.0 : 1.0;
        total += std::pow(mesh.meshsize(static_cast<int>(t)), theta) * weight * upsilon;
    }
    return total;
}

/// Debug dump, one "z_index xi_sq" line per vertex.
inline void write_oscillation(std::ostream & out, const OscillationField & field)
{
    for (std::size_t z = 0; z < field.xi.size(); ++z) out << z << ' ' << format_real(field.xi[z] * field.xi[z]) << '\n';
}

} // namespace afem
