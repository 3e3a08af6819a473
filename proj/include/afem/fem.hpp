#pragma once

#include <afem/errors.hpp>
#include <afem/geometry.hpp>
#include <afem/mesh.hpp>
#include <afem/problem.hpp>
#include <afem/sparse.hpp>

#include <array>
#include <cmath>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace afem {

/// Gradients of the barycentric coordinates and area of a triangle.
struct ElementGeometry
{
    std::array<Point2, 3> grad_lambda{};
    double area = 0.0;

    static ElementGeometry of(const std::array<Point2, 3> & p)
    {
        ElementGeometry g;
        const double twice = orient2d(p[0], p[1], p[2]);
        g.area = 0.5 * twice;
        for (int i = 0; i < 3; ++i)
        {
            const Point2 a = p[(i + 1) % 3];
            const Point2 b = p[(i + 2) % 3];
            g.grad_lambda[i] = {(a.y - b.y) / twice, (b.x - a.x) / twice};
        }
        return g;
    }
};

/**
 * Lagrange basis on a triangle in barycentric form. Degree 1: lambda_i. Degree 2:
 * lambda_i (2 lambda_i - 1) at the vertices, then 4 lambda_a lambda_b at the
 * midpoint of local edge k = (a, b) = ((k+1)%3, (k+2)%3).
 */
namespace lagrange {
    inline int local_size(int degree) { return degree == 1 ? 3 : 6; }

    inline std::array<double, 6> values(int degree, const std::array<double, 3> & l)
    {
        std::array<double, 6> v{};
        if (degree == 1)
        {
            v[0] = l[0], v[1] = l[1], v[2] = l[2];
            return v;
        }
        for (int i = 0; i < 3; ++i) v[i] = l[i] * (2.0 * l[i] - 1.0);
        for (int k = 0; k < 3; ++k) v[3 + k] = 4.0 * l[(k + 1) % 3] * l[(k + 2) % 3];
        return v;
    }

    inline std::array<Point2, 6> gradients(int degree, const ElementGeometry & g, const std::array<double, 3> & l)
    {
        std::array<Point2, 6> d{};
        if (degree == 1)
        {
            d[0] = g.grad_lambda[0], d[1] = g.grad_lambda[1], d[2] = g.grad_lambda[2];
            return d;
        }
        for (int i = 0; i < 3; ++i) d[i] = (4.0 * l[i] - 1.0) * g.grad_lambda[i];
        for (int k = 0; k < 3; ++k)
        {
            const int a = (k + 1) % 3;
            const int b = (k + 2) % 3;
            d[3 + k] = 4.0 * (l[a] * g.grad_lambda[b] + l[b] * g.grad_lambda[a]);
        }
        return d;
    }

    /// Laplacians of the degree-2 basis functions (constant per element).
    inline std::array<double, 6> laplacians(const ElementGeometry & g)
    {
        std::array<double, 6> lap{};
        for (int i = 0; i < 3; ++i) lap[i] = 4.0 * dot(g.grad_lambda[i], g.grad_lambda[i]);
        for (int k = 0; k < 3; ++k) lap[3 + k] = 8.0 * dot(g.grad_lambda[(k + 1) % 3], g.grad_lambda[(k + 2) % 3]);
        return lap;
    }
}

/**
 * Global numbering of Lagrange nodes. Vertices come first; for degree 2 the
 * midpoint of edge e is node num_vertices + e. Boundary nodes carry Dirichlet data.
 */
class DofMap
{
public:
    DofMap(const Triangulation & mesh, int degree) : _degree(degree)
    {
        if (degree != 1 && degree != 2) throw InputError("degree must be 1 or 2");
        const auto nv = mesh.num_vertices();
        for (std::size_t v = 0; v < nv; ++v)
        {
            _nodes.push_back(mesh.point(static_cast<int>(v)));
            _boundary.push_back(mesh.is_boundary_vertex(static_cast<int>(v)));
        }
        if (degree == 2)
            for (const auto & e : mesh.edges())
            {
                _nodes.push_back(midpoint(mesh.point(e.vertices[0]), mesh.point(e.vertices[1])));
                _boundary.push_back(e.on_boundary());
            }
        _element_nodes.resize(mesh.num_triangles());
        for (std::size_t t = 0; t < mesh.num_triangles(); ++t)
        {
            auto & en = _element_nodes[t];
            en.fill(-1);
            for (int i = 0; i < 3; ++i) en[i] = mesh.cell(static_cast<int>(t)).vertices[i];
            if (degree == 2)
                for (int k = 0; k < 3; ++k) en[3 + k] = static_cast<int>(nv) + mesh.cell_edge(static_cast<int>(t), k);
        }
        _free_index.assign(_nodes.size(), -1);
        for (std::size_t i = 0; i < _nodes.size(); ++i)
            if (!_boundary[i])
            {
                _free_index[i] = static_cast<int>(_free_nodes.size());
                _free_nodes.push_back(static_cast<int>(i));
            }
    }

    int degree() const { return _degree; }
    int local_size() const { return lagrange::local_size(_degree); }
    std::size_t num_nodes() const { return _nodes.size(); }
    std::size_t num_free() const { return _free_nodes.size(); }
    Point2 node(int i) const { return _nodes[i]; }
    bool is_boundary(int i) const { return _boundary[i] != 0; }
    std::span<const int> element_nodes(int t) const
    {
        return {_element_nodes[t].data(), static_cast<std::size_t>(local_size())};
    }
    const std::vector<int> & free_nodes() const { return _free_nodes; }
    /// Position of node i among the free nodes, -1 for boundary nodes.
    int free_index(int i) const { return _free_index[i]; }

private:
    int _degree;
    std::vector<Point2> _nodes;
    std::vector<std::uint8_t> _boundary;
    std::vector<std::array<int, 6>> _element_nodes;
    std::vector<int> _free_nodes;
    std::vector<int> _free_index;
};

using ElementMatrix = std::array<std::array<double, 6>, 6>;

/**
 * Element stiffness matrix. Degree 1 in closed form; degree 2 with the edge-midpoint
 * rule, which is exact for the quadratic gradient products.
 */
inline ElementMatrix element_stiffness(const std::array<Point2, 3> & corners, int degree)
{
    const auto g = ElementGeometry::of(corners);
    ElementMatrix k{};
    if (degree == 1)
    {
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) k[i][j] = g.area * dot(g.grad_lambda[i], g.grad_lambda[j]);
        return k;
    }
    static constexpr std::array<std::array<double, 3>, 3> mids{{{0.0, 0.5, 0.5}, {0.5, 0.0, 0.5}, {0.5, 0.5, 0.0}}};
    for (const auto & l : mids)
    {
        const auto d = lagrange::gradients(2, g, l);
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j) k[i][j] += g.area / 3.0 * dot(d[i], d[j]);
    }
    return k;
}

/// Full stiffness matrix over all nodes, boundary nodes included.
inline CsrMatrix assemble_stiffness(const Triangulation & mesh, const DofMap & dofs)
{
    const int n = dofs.local_size();
    std::vector<Triplet> entries;
    entries.reserve(mesh.num_triangles() * static_cast<std::size_t>(n * n));
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t)
    {
        const auto k = element_stiffness(mesh.corners(static_cast<int>(t)), dofs.degree());
        const auto nodes = dofs.element_nodes(static_cast<int>(t));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) entries.push_back({nodes[i], nodes[j], k[i][j]});
    }
    const int size = static_cast<int>(dofs.num_nodes());
    return CsrMatrix::from_triplets(size, size, std::move(entries));
}

/// Load vector with entries sum_j alpha_j phi_i(x_j) over all nodes.
inline std::vector<double> assemble_point_load(const Triangulation & mesh, const DofMap & dofs,
                                               std::span<const PointSource> sources)
{
    std::vector<double> load(dofs.num_nodes(), 0.0);
    for (const auto & s : sources)
    {
        const auto loc = locate(mesh, s.location);
        const auto phi = lagrange::values(dofs.degree(), loc.barycentric);
        const auto nodes = dofs.element_nodes(loc.triangle);
        for (std::size_t i = 0; i < nodes.size(); ++i) load[nodes[i]] += s.weight * phi[i];
    }
    return load;
}

/// Linear system over the free nodes after Dirichlet elimination.
struct SparseSystem
{
    CsrMatrix matrix;
    std::vector<double> rhs;
    /// Prescribed values at every node (zero at free nodes).
    std::vector<double> boundary_values;
};

/**
 * Restricts the full system to the free nodes. Boundary nodes take the nodal values
 * of boundary_data (zero when empty) and their columns move to the right-hand side.
 */
inline SparseSystem apply_boundary_data(const CsrMatrix & full, std::span<const double> load, const DofMap & dofs,
                                        const ScalarField & boundary_data = {})
{
    SparseSystem sys;
    sys.boundary_values.assign(dofs.num_nodes(), 0.0);
    if (boundary_data)
        for (std::size_t i = 0; i < dofs.num_nodes(); ++i)
        {
            if (!dofs.is_boundary(static_cast<int>(i))) continue;
            const double g = boundary_data(dofs.node(static_cast<int>(i)));
            if (!std::isfinite(g))
                throw InputError("boundary data undefined at node " + to_string(dofs.node(static_cast<int>(i))));
            sys.boundary_values[i] = g;
        }
    const auto & free = dofs.free_nodes();
    std::vector<Triplet> entries;
    entries.reserve(full.nonzeros());
    sys.rhs.assign(free.size(), 0.0);
    for (std::size_t r = 0; r < free.size(); ++r)
    {
        const int node = free[r];
        double rhs = load[node];
        const auto cols = full.row_cols(node);
        const auto vals = full.row_values(node);
        for (std::size_t k = 0; k < cols.size(); ++k)
        {
            const int c = dofs.free_index(cols[k]);
            if (c >= 0)
                entries.push_back({static_cast<int>(r), c, vals[k]});
            else
                rhs -= vals[k] * sys.boundary_values[cols[k]];
        }
        sys.rhs[r] = rhs;
    }
    const int n = static_cast<int>(free.size());
    sys.matrix = CsrMatrix::from_triplets(n, n, std::move(entries));
    return sys;
}

/// Solves the reduced system; returns the free coefficients.
inline CgResult solve(const SparseSystem & system, double tol = 1e-10, std::span<const double> initial_guess = {})
{
    CgOptions options;
    options.tolerance = tol;
    return conjugate_gradient(system.matrix, system.rhs, options, initial_guess);
}

/// Coefficients of a continuous piecewise polynomial, one per Lagrange node.
struct DiscreteSolution
{
    std::shared_ptr<const Triangulation> mesh;
    std::shared_ptr<const DofMap> dofs;
    std::vector<double> coefficients;

    int degree() const { return dofs->degree(); }
};

inline DiscreteSolution make_solution(std::shared_ptr<const Triangulation> mesh, int degree,
                                      std::vector<double> coefficients = {})
{
    auto dofs = std::make_shared<const DofMap>(*mesh, degree);
    if (coefficients.empty()) coefficients.assign(dofs->num_nodes(), 0.0);
    if (coefficients.size() != dofs->num_nodes()) throw InputError("coefficient count does not match the node count");
    return {std::move(mesh), std::move(dofs), std::move(coefficients)};
}

/// Nodal interpolant of f.
inline DiscreteSolution interpolate(std::shared_ptr<const Triangulation> mesh, int degree, const ScalarField & f)
{
    auto u = make_solution(std::move(mesh), degree);
    for (std::size_t i = 0; i < u.coefficients.size(); ++i) u.coefficients[i] = f(u.dofs->node(static_cast<int>(i)));
    return u;
}

inline double evaluate(const DiscreteSolution & u, int t, const std::array<double, 3> & bary)
{
    const auto phi = lagrange::values(u.degree(), bary);
    const auto nodes = u.dofs->element_nodes(t);
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) sum += u.coefficients[nodes[i]] * phi[i];
    return sum;
}

/// Value at p, computed on the lowest-index triangle containing p.
inline double evaluate(const DiscreteSolution & u, Point2 p)
{
    const auto loc = locate(*u.mesh, p);
    return evaluate(u, loc.triangle, loc.barycentric);
}

inline Point2 gradient(const DiscreteSolution & u, int t, const std::array<double, 3> & bary)
{
    const auto g = ElementGeometry::of(u.mesh->corners(t));
    const auto d = lagrange::gradients(u.degree(), g, bary);
    const auto nodes = u.dofs->element_nodes(t);
    Point2 sum;
    for (std::size_t i = 0; i < nodes.size(); ++i) sum = sum + u.coefficients[nodes[i]] * d[i];
    return sum;
}

/// Gradient of U restricted to T, affine in general: its values at the three corners.
struct ElementGradient
{
    std::array<Point2, 3> at_corners{};

    Point2 at(const std::array<double, 3> & l) const
    {
        return l[0] * at_corners[0] + l[1] * at_corners[1] + l[2] * at_corners[2];
    }
};

inline ElementGradient gradient(const DiscreteSolution & u, int t)
{
    ElementGradient g;
    for (int i = 0; i < 3; ++i)
    {
        std::array<double, 3> l{};
        l[i] = 1.0;
        g.at_corners[i] = gradient(u, t, l);
    }
    return g;
}

/// Laplacian of U on T; constant for degree 2, zero for degree 1.
inline double laplacian(const DiscreteSolution & u, int t)
{
    if (u.degree() == 1) return 0.0;
    const auto lap = lagrange::laplacians(ElementGeometry::of(u.mesh->corners(t)));
    const auto nodes = u.dofs->element_nodes(t);
    double sum = 0.0;
    for (int i = 0; i < 6; ++i) sum += u.coefficients[nodes[i]] * lap[i];
    return sum;
}

/// Energy B[U, U] = int |grad U|^2.
inline double energy(const DiscreteSolution & u)
{
    const int n = u.dofs->local_size();
    double sum = 0.0;
    for (std::size_t t = 0; t < u.mesh->num_triangles(); ++t)
    {
        const auto k = element_stiffness(u.mesh->corners(static_cast<int>(t)), u.degree());
        const auto nodes = u.dofs->element_nodes(static_cast<int>(t));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) sum += u.coefficients[nodes[i]] * k[i][j] * u.coefficients[nodes[j]];
    }
    return sum;
}

/**
 * Transfers a degree-1 solution to a mesh obtained from its mesh by bisection. New
 * vertices are edge midpoints, so averaging the parent values is exact.
 */
inline std::vector<double> prolongate_vertices(std::span<const double> coarse, const Triangulation & fine)
{
    std::vector<double> out(fine.num_vertices(), 0.0);
    const auto & parents = fine.vertex_parents();
    for (std::size_t v = 0; v < out.size(); ++v)
    {
        if (v < coarse.size())
            out[v] = coarse[v];
        else
            out[v] = 0.5 * (out[parents[v][0]] + out[parents[v][1]]);
    }
    return out;
}

struct SolveStats
{
    int cg_iterations = 0;
    double relative_residual = 0.0;
};

/**
 * Galerkin solution of the point-source problem on the given mesh. A degree-1 initial
 * guess over all nodes (e.g. a prolongated coarse solution) is used for the free nodes.
 */
inline DiscreteSolution solve_problem(std::shared_ptr<const Triangulation> mesh, const ProblemSpec & spec,
                                      double tol = 1e-10, std::span<const double> initial_guess = {},
                                      SolveStats * stats = nullptr)
{
    auto dofs = std::make_shared<const DofMap>(*mesh, spec.degree);
    const auto full = assemble_stiffness(*mesh, *dofs);
    const auto load = assemble_point_load(*mesh, *dofs, spec.sources);
    const auto system = apply_boundary_data(full, load, *dofs, spec.boundary_data);

    std::vector<double> guess;
    if (initial_guess.size() == dofs->num_nodes())
    {
        guess.reserve(dofs->num_free());
        for (int node : dofs->free_nodes()) guess.push_back(initial_guess[node]);
    }
    const auto result = solve(system, tol, guess);
    if (stats) *stats = {result.iterations, result.relative_residual};

    std::vector<double> coefficients = system.boundary_values;
    const auto & free = dofs->free_nodes();
    for (std::size_t r = 0; r < free.size(); ++r) coefficients[free[r]] = result.x[r];
    return {std::move(mesh), std::move(dofs), std::move(coefficients)};
}

} // namespace afem
