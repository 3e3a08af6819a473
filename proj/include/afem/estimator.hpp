#pragma once

#include <afem/fem.hpp>
#include <afem/mesh_io.hpp>

#include <cmath>
#include <ostream>
#include <vector>

namespace afem {

/**
 * Residual indicators of one discrete solution.
 *
 *     eta_T^2 = h_T^{2+2 theta} ||Lap U||_{0,T}^2 + h_T^{1+2 theta} ||[grad U]||_{0,dT}^2
 *
 * with h_T = |T|^{1/2}. The per-vertex oscillation is filled in separately.
 */
struct IndicatorField
{
    double theta = 0.0;
    std::vector<double> eta_sq;
    std::vector<double> xi_sq;
    double global_eta = 0.0;
    double global_xi = 0.0;

    double eta(int t) const { return std::sqrt(eta_sq[t]); }
};

namespace detail {
    inline Point2 outward_normal(const Triangulation & mesh, int t, int k)
    {
        const auto & v = mesh.cell(t).vertices;
        const Point2 d = mesh.point(v[(k + 2) % 3]) - mesh.point(v[(k + 1) % 3]);
        const double len = norm(d);
        return {d.y / len, -d.x / len};
    }
}

/**
 * L2 norm over edge e of the normal flux jump grad U1 . n1 + grad U2 . n2; zero on
 * boundary edges. The jump is affine along the edge, so two-point Gauss is exact.
 */
inline double edge_jump(const DiscreteSolution & u, int e)
{
    const auto & mesh = *u.mesh;
    const auto & edge = mesh.edge(e);
    if (edge.on_boundary()) return 0.0;
    const int t1 = edge.triangles[0];
    const int t2 = edge.triangles[1];
    const Point2 n1 = detail::outward_normal(mesh, t1, edge.local[0]);
    const double len = mesh.edge_length(e);

    if (u.degree() == 1)
    {
        const std::array<double, 3> any{1.0 / 3, 1.0 / 3, 1.0 / 3};
        const double jump = dot(gradient(u, t1, any) - gradient(u, t2, any), n1);
        return std::abs(jump) * std::sqrt(len);
    }

    const Point2 a = mesh.point(edge.vertices[0]);
    const Point2 b = mesh.point(edge.vertices[1]);
    const auto c1 = mesh.corners(t1);
    const auto c2 = mesh.corners(t2);
    const double offset = 0.5 / std::sqrt(3.0);
    double sum = 0.0;
    for (double s : {0.5 - offset, 0.5 + offset})
    {
        const Point2 p = a + s * (b - a);
        const double jump = dot(gradient(u, t1, barycentric(c1[0], c1[1], c1[2], p))
                                    - gradient(u, t2, barycentric(c2[0], c2[1], c2[2], p)),
                                n1);
        sum += 0.5 * jump * jump;
    }
    return std::sqrt(sum * len);
}

/// ||Lap U||_{0,T}; U is piecewise polynomial so the Laplacian is constant on T.
inline double element_residual(const DiscreteSolution & u, int t)
{
    return std::abs(laplacian(u, t)) * u.mesh->meshsize(t);
}

namespace detail {
    inline double combine_indicator(double h, double theta, double residual, double jump_sq)
    {
        return std::pow(h, 2.0 + 2.0 * theta) * residual * residual + std::pow(h, 1.0 + 2.0 * theta) * jump_sq;
    }
}

/// eta_{T,theta}. Each of the three edges enters with its full squared jump norm.
inline double indicator(const DiscreteSolution & u, int t, double theta)
{
    double jump_sq = 0.0;
    for (int e : u.mesh->cell_edges(t))
    {
        const double j = edge_jump(u, e);
        jump_sq += j * j;
    }
    return std::sqrt(detail::combine_indicator(u.mesh->meshsize(t), theta, element_residual(u, t), jump_sq));
}

/// All indicators and the global estimator; edge norms are computed once per edge.
inline IndicatorField estimate(const DiscreteSolution & u, double theta)
{
    const auto & mesh = *u.mesh;
    std::vector<double> jump_sq(mesh.num_edges());
    for (std::size_t e = 0; e < mesh.num_edges(); ++e)
    {
        const double j = edge_jump(u, static_cast<int>(e));
        jump_sq[e] = j * j;
    }
    IndicatorField field;
    field.theta = theta;
    field.eta_sq.resize(mesh.num_triangles());
    field.xi_sq.assign(mesh.num_vertices(), 0.0);
    double total = 0.0;
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t)
    {
        const auto & edges = mesh.cell_edges(static_cast<int>(t));
        const double js = jump_sq[edges[0]] + jump_sq[edges[1]] + jump_sq[edges[2]];
        field.eta_sq[t] = detail::combine_indicator(mesh.meshsize(static_cast<int>(t)), theta,
                                                    element_residual(u, static_cast<int>(t)), js);
        total += field.eta_sq[t];
    }
    field.global_eta = std::sqrt(total);
    return field;
}

/// Debug dump, one "T_index eta_sq" line per triangle.
inline void write_indicators(std::ostream & out, const IndicatorField & field)
{
    for (std::size_t t = 0; t < field.eta_sq.size(); ++t) out << t << ' ' << format_real(field.eta_sq[t]) << '\n';
}

} // namespace afem
