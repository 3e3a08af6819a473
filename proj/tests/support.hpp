#pragma once

// Brute-force oracles and fixtures shared by the test suites. Everything here is
// deliberately naive: quadratic loops over the raw vertex and cell arrays, with no
// use of the topology the library builds.

#include <afem/afem.hpp>

#include <cmath>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace afem::testing {

/// Conformity by exhaustion: no vertex lies strictly inside an edge of any cell.
inline std::vector<std::string> brute_force_hanging_nodes(const Triangulation & mesh)
{
    std::vector<std::string> out;
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t)
    {
        const auto c = mesh.corners(static_cast<int>(t));
        for (int k = 0; k < 3; ++k)
        {
            const Point2 a = c[(k + 1) % 3];
            const Point2 b = c[(k + 2) % 3];
            const double len = distance(a, b);
            for (std::size_t v = 0; v < mesh.num_vertices(); ++v)
            {
                const Point2 p = mesh.point(static_cast<int>(v));
                if (p == a || p == b) continue;
                const double along = dot(p - a, b - a) / (len * len);
                if (along <= 0.0 || along >= 1.0) continue;
                if (std::abs(orient2d(a, b, p)) <= 1e-12 * len * len)
                    out.push_back("vertex " + std::to_string(v) + " hangs on triangle " + std::to_string(t));
            }
        }
    }
    return out;
}

inline double sum_of_areas(const Triangulation & mesh)
{
    double total = 0.0;
    for (const auto & c : mesh.cells())
        total += signed_area(mesh.point(c.vertices[0]), mesh.point(c.vertices[1]), mesh.point(c.vertices[2]));
    return total;
}

inline bool all_positively_oriented(const Triangulation & mesh)
{
    for (const auto & c : mesh.cells())
        if (!(orient2d(mesh.point(c.vertices[0]), mesh.point(c.vertices[1]), mesh.point(c.vertices[2])) > 0.0))
            return false;
    return true;
}

inline std::vector<int> random_marks(const Triangulation & mesh, std::mt19937_64 & rng, double fraction)
{
    std::bernoulli_distribution pick(fraction);
    std::vector<int> marked;
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t)
        if (pick(rng)) marked.push_back(static_cast<int>(t));
    if (marked.empty())
        marked.push_back(std::uniform_int_distribution<int>(0, static_cast<int>(mesh.num_triangles()) - 1)(rng));
    return marked;
}

/// A mesh refined by `steps` random markings, deterministic for a given seed.
inline Triangulation random_refinement(const PolygonalDomain & domain, unsigned seed, int steps, double fraction = 0.2)
{
    std::mt19937_64 rng(seed);
    auto mesh = initial_mesh(domain);
    for (int s = 0; s < steps; ++s) mesh = bisect(mesh, random_marks(mesh, rng, fraction));
    return mesh;
}

/// A point strictly inside the domain, drawn uniformly from its bounding box.
inline Point2 random_interior_point(const PolygonalDomain & domain, std::mt19937_64 & rng, double margin = 1e-3)
{
    double lo_x = 1e300, hi_x = -1e300, lo_y = 1e300, hi_y = -1e300;
    for (const auto & p : domain.vertices())
    {
        lo_x = std::min(lo_x, p.x);
        hi_x = std::max(hi_x, p.x);
        lo_y = std::min(lo_y, p.y);
        hi_y = std::max(hi_y, p.y);
    }
    std::uniform_real_distribution<double> ux(lo_x, hi_x), uy(lo_y, hi_y);
    for (;;)
    {
        const Point2 p{ux(rng), uy(rng)};
        if (domain.contains_strictly(p, margin)) return p;
    }
}

inline std::vector<PointSource> random_sources(const PolygonalDomain & domain, std::mt19937_64 & rng, int count,
                                               bool mixed_signs = true)
{
    std::uniform_real_distribution<double> weight(0.2, 2.0);
    std::bernoulli_distribution negative(0.5);
    std::vector<PointSource> out;
    for (int i = 0; i < count; ++i)
    {
        double w = weight(rng);
        if (mixed_signs && negative(rng)) w = -w;
        out.push_back({random_interior_point(domain, rng), w});
    }
    return out;
}

inline std::shared_ptr<const Triangulation> share(Triangulation mesh)
{
    return std::make_shared<const Triangulation>(std::move(mesh));
}

/// Two triangles sharing the edge (0,0)-(1,1) of the unit square.
inline Triangulation two_triangle_square()
{
    return Triangulation({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {}, {{{0, 1, 2}, 1, 0}, {{0, 2, 3}, 2, 0}});
}

} // namespace afem::testing
