#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace afem;
using afem::testing::share;

namespace {

PolygonalDomain domain_for(unsigned seed)
{
    switch (seed % 3)
    {
    case 0: return PolygonalDomain::square();
    case 1: return PolygonalDomain::lshape();
    default: return PolygonalDomain({{0, 0}, {2, 0}, {2.5, 1}, {1, 2}, {-0.5, 1}});
    }
}

std::vector<double> residual(const CsrMatrix & a, std::span<const double> x, std::span<const double> b)
{
    std::vector<double> ax(b.size());
    a.multiply(x, ax);
    for (std::size_t i = 0; i < b.size(); ++i) ax[i] = b[i] - ax[i];
    return ax;
}

} // namespace

TEST(Property, RandomMarkingKeepsMeshConformingOrientedAndAreaPreserving)
{
    for (unsigned seed = 0; seed < 1000; ++seed)
    {
        const auto domain = domain_for(seed);
        std::mt19937_64 rng(seed);
        auto mesh = initial_mesh(domain);
        const int steps = 1 + static_cast<int>(seed % 5);
        for (int s = 0; s < steps; ++s)
        {
            const auto marks = afem::testing::random_marks(mesh, rng, 0.15);
            const auto refined = bisect(mesh, marks);
            ASSERT_GE(refined.num_triangles(), mesh.num_triangles() + 3 * marks.size()) << "seed " << seed;
            mesh = refined;
        }
        ASSERT_TRUE(afem::testing::brute_force_hanging_nodes(mesh).empty()) << "seed " << seed;
        ASSERT_TRUE(check_invariants(mesh).empty()) << "seed " << seed;
        ASSERT_TRUE(afem::testing::all_positively_oriented(mesh)) << "seed " << seed;
        ASSERT_NEAR(afem::testing::sum_of_areas(mesh), domain.area(), 1e-12 * domain.area()) << "seed " << seed;
    }
}

TEST(Property, GalerkinOrthogonality)
{
    const double tol = 1e-10;
    for (unsigned seed = 0; seed < 50; ++seed)
    {
        ProblemSpec spec;
        spec.domain = domain_for(seed);
        spec.degree = 1 + static_cast<int>(seed % 2);
        std::mt19937_64 rng(seed);
        spec.sources = afem::testing::random_sources(spec.domain, rng, 1 + static_cast<int>(seed % 4));
        if (seed % 5 == 0) spec.boundary_data = [](Point2 p) { return p.x - 0.5 * p.y; };
        const auto mesh = share(afem::testing::random_refinement(spec.domain, seed, 4, 0.3));
        const auto u = solve_problem(mesh, spec, tol);

        // a(U, V) = load(V) for every free basis function V, checked on the full system
        const DofMap & dofs = *u.dofs;
        const auto a = assemble_stiffness(*mesh, dofs);
        const auto load = assemble_point_load(*mesh, dofs, spec.sources);
        const auto r = residual(a, u.coefficients, load);
        double r_sq = 0.0;
        for (int node : dofs.free_nodes())
            r_sq += r[node] * r[node];
        const auto system = apply_boundary_data(a, load, dofs, spec.boundary_data);
        const double scale = std::sqrt(dot(system.rhs, system.rhs));
        ASSERT_GT(scale, 0.0);
        EXPECT_LE(std::sqrt(r_sq), 10.0 * tol * scale) << "seed " << seed;
    }
}

TEST(Property, EstimatorDependsOnlyOnTheDiscreteSolution)
{
    for (unsigned seed = 0; seed < 20; ++seed)
    {
        ProblemSpec spec;
        spec.domain = domain_for(seed);
        std::mt19937_64 rng(seed + 7);
        spec.sources = afem::testing::random_sources(spec.domain, rng, 3);
        const auto mesh = share(afem::testing::random_refinement(spec.domain, seed + 7, 4));
        const auto u = solve_problem(mesh, spec);
        // the same coefficients, detached from any problem data
        const auto detached = make_solution(share(*mesh), 1, u.coefficients);
        const auto a = estimate(u, 0.3);
        const auto b = estimate(detached, 0.3);
        EXPECT_EQ(a.eta_sq, b.eta_sq) << "seed " << seed;
        EXPECT_EQ(a.global_eta, b.global_eta);
    }
}

TEST(Property, OscillationIsSignSymmetric)
{
    for (unsigned seed = 0; seed < 20; ++seed)
    {
        const auto domain = domain_for(seed);
        const auto mesh = afem::testing::random_refinement(domain, seed + 300, 4);
        std::mt19937_64 rng(seed + 300);
        auto sources = afem::testing::random_sources(domain, rng, 2 + static_cast<int>(seed % 6));
        const int degree = 1 + static_cast<int>(seed % 2);
        const auto a = xi_global(mesh, sources, 0.25, degree);
        for (auto & s : sources) s.weight = -s.weight;
        const auto b = xi_global(mesh, sources, 0.25, degree);
        EXPECT_EQ(a.xi, b.xi) << "seed " << seed;
        EXPECT_EQ(a.global_xi, b.global_xi);
    }
}

TEST(Property, SeminormDilationExponent)
{
    const auto base = initial_mesh(PolygonalDomain::square());
    std::vector<Point2> scaled = base.vertices();
    const double lambda = 2.0;
    for (auto & p : scaled) p = lambda * p;
    const Triangulation big(scaled, {}, base.cells());
    const auto g = [](Point2 p) { return p.x * p.x - p.y; };
    const auto on = [&](const Triangulation & mesh, double l) {
        return [&mesh, l, &g](int t, const std::array<double, 3> & b) {
            const auto c = mesh.corners(t);
            return g((1.0 / l) * from_barycentric(c[0], c[1], c[2], b));
        };
    };
    for (double s : {0.25, 0.5, 0.75})
    {
        const double a = fractional_seminorm(base, on(base, 1.0), s);
        const double b = fractional_seminorm(big, on(big, lambda), s);
        const double exponent = std::log(b / a) / std::log(lambda);
        EXPECT_NEAR(exponent, 1.0 - s, 0.02 * (1.0 - s)) << "s = " << s;
    }
}

TEST(Property, SlopeFitExactOnPowerLaws)
{
    struct Row
    {
        std::size_t ndofs;
        double value;
    };
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> slope(-2.0, 0.0), constant(0.1, 10.0);
    for (int trial = 0; trial < 20; ++trial)
    {
        const double p = slope(rng);
        const double c = constant(rng);
        std::vector<Row> rows;
        for (std::size_t n = 7; n < 200000; n = n * 3 + 1) rows.push_back({n, c * std::pow(static_cast<double>(n), p)});
        const auto fit = fit_slope(std::span<const Row>(rows), [](const Row & r) { return std::optional<double>(r.value); });
        EXPECT_NEAR(fit.slope, p, 1e-12);
    }
}
