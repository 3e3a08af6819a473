#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

using namespace afem;
using afem::testing::share;

namespace {

struct Row
{
    std::size_t ndofs;
    std::optional<double> value;
};

Triangulation dilate(const Triangulation & mesh, double lambda)
{
    std::vector<Point2> v = mesh.vertices();
    for (auto & p : v) p = lambda * p;
    return Triangulation(std::move(v), {}, mesh.cells());
}

Triangulation unit_triangle() { return Triangulation({{0, 0}, {1, 0}, {0, 1}}, {}, {{{0, 1, 2}, 0, 0}}); }

} // namespace

TEST(Fundamental, ValuesAndGradient)
{
    EXPECT_EQ(fundamental_value({1, 0}), 0.0);
    EXPECT_NEAR(fundamental_value({0.5, 0}), std::log(2.0) / (2 * std::numbers::pi), 1e-15);
    EXPECT_TRUE(std::isinf(fundamental_value({0, 0})));
    EXPECT_THROW(fundamental_gradient({0, 0}), std::domain_error);
    const double h = 1e-6;
    for (Point2 p : {Point2{0.3, -0.2}, Point2{-0.7, 0.9}, Point2{0.01, 0.02}})
    {
        const Point2 g = fundamental_gradient(p);
        const double scale = norm(g);
        EXPECT_NEAR(g.x, (fundamental_value({p.x + h, p.y}) - fundamental_value({p.x - h, p.y})) / (2 * h), 1e-6 * scale);
        EXPECT_NEAR(g.y, (fundamental_value({p.x, p.y + h}) - fundamental_value({p.x, p.y - h})) / (2 * h), 1e-6 * scale);
    }
}

TEST(L2Error, QuarticMomentOfUnitTriangle)
{
    const auto mesh = share(unit_triangle());
    const auto zero = make_solution(mesh, 1, {0.0, 0.0, 0.0});
    const ExactSolution square{"x^2", [](Point2 p) { return p.x * p.x; }, [](Point2 p) { return Point2{2 * p.x, 0}; }, {}};
    // int_0^1 x^4 (1 - x) dx = 1/5 - 1/6
    EXPECT_NEAR(l2_error(zero, square), 1.0 / std::sqrt(30.0), 1e-14);
}

TEST(L2Error, InterpolantConvergesAtSecondOrder)
{
    const ExactSolution smooth{"sin", [](Point2 p) { return std::sin(p.x) * std::cos(p.y); },
                               [](Point2 p) { return Point2{std::cos(p.x) * std::cos(p.y), -std::sin(p.x) * std::sin(p.y)}; },
                               {}};
    auto mesh = refine_uniformly(initial_mesh(PolygonalDomain::square()));
    double previous = 0.0;
    for (int level = 0; level < 3; ++level)
    {
        const auto u = interpolate(share(mesh), 1, smooth.value);
        const double e = l2_error(u, smooth);
        if (level > 0)
        {
            EXPECT_NEAR(std::log2(previous / e), 2.0, 0.15);
        }
        previous = e;
        mesh = refine_uniformly(mesh);
    }
}

TEST(H1ErrorOffSingularity, ExactForAffineFunctions)
{
    const auto mesh = share(refine_uniformly(initial_mesh(PolygonalDomain::square())));
    const ExactSolution affine{"affine", [](Point2 p) { return 2 * p.x - p.y; }, [](Point2) { return Point2{2, -1}; }, {}};
    const auto u = interpolate(mesh, 1, affine.value);
    EXPECT_NEAR(h1_error_off_singularity(u, affine), 0.0, 1e-13);
    // U = 0: the error is sqrt(5 |cells off the diamond|); the cells at the origin meet it
    const auto zero = interpolate(mesh, 1, [](Point2) { return 0.0; });
    double off = 0.0;
    for (std::size_t t = 0; t < mesh->num_triangles(); ++t)
    {
        const auto & v = mesh->cell(static_cast<int>(t)).vertices;
        bool at_origin = false;
        for (int i : v) at_origin |= mesh->point(i) == Point2{0, 0};
        if (!at_origin) off += mesh->area(static_cast<int>(t));
    }
    EXPECT_DOUBLE_EQ(off, 2.0);
    EXPECT_NEAR(h1_error_off_singularity(zero, affine, 0.25), std::sqrt(5.0 * off), 1e-12);
}

TEST(Seminorm, ConstantVanishes)
{
    const auto mesh = refine_uniformly(initial_mesh(PolygonalDomain::square()));
    const auto one = [](int, const std::array<double, 3> &) { return 1.0; };
    EXPECT_EQ(fractional_seminorm(mesh, one, 0.5), 0.0);
}

TEST(Seminorm, StableAcrossSubdivisionLevels)
{
    const auto mesh = initial_mesh(PolygonalDomain::square());
    const auto x = [&](int t, const std::array<double, 3> & l) {
        const auto c = mesh.corners(t);
        return from_barycentric(c[0], c[1], c[2], l).x;
    };
    for (double s : {0.25, 0.5})
    {
        SeminormOptions coarse;
        coarse.levels = 3;
        SeminormOptions fine;
        fine.levels = 4;
        const double a = fractional_seminorm(mesh, x, s, coarse);
        const double b = fractional_seminorm(mesh, x, s, fine);
        EXPECT_NEAR(a, b, 0.02 * b) << "s = " << s;
    }
}

TEST(Seminorm, DilationAndHomogeneity)
{
    const auto base = refine_uniformly(initial_mesh(PolygonalDomain::lshape()));
    const auto g = [](Point2 p) { return p.x * p.y + std::sin(p.x); };
    const auto on = [&](const Triangulation & mesh, double lambda, double scale) {
        return [&mesh, lambda, scale, &g](int t, const std::array<double, 3> & l) {
            const auto c = mesh.corners(t);
            return scale * g((1.0 / lambda) * from_barycentric(c[0], c[1], c[2], l));
        };
    };
    const double s = 0.5;
    const double reference = fractional_seminorm(base, on(base, 1.0, 1.0), s);
    const auto big = dilate(base, 2.0);
    // v(x / lambda) on lambda G: the seminorm scales by lambda^{1 - s}
    EXPECT_NEAR(fractional_seminorm(big, on(big, 2.0, 1.0), s) / reference, std::pow(2.0, 1 - s), 1e-10);
    EXPECT_NEAR(fractional_seminorm(base, on(base, 1.0, -3.0), s), 3.0 * reference, 1e-12 * reference);
}

TEST(Seminorm, ReverseOrderAgrees)
{
    const auto mesh = share(afem::testing::random_refinement(PolygonalDomain::square(), 9, 2));
    const auto u = interpolate(mesh, 1, [](Point2 p) { return std::exp(p.x) * p.y; });
    SeminormOptions reverse;
    reverse.reverse_order = true;
    const double a = fractional_seminorm(u, 0.4);
    const double b = fractional_seminorm(u, 0.4, reverse);
    EXPECT_NEAR(a, b, 1e-12 * a);
}

TEST(Seminorm, RejectsOrderAndLargeMeshes)
{
    const auto mesh = initial_mesh(PolygonalDomain::square());
    const auto one = [](int, const std::array<double, 3> &) { return 1.0; };
    EXPECT_THROW(fractional_seminorm(mesh, one, 0.0), InputError);
    EXPECT_THROW(fractional_seminorm(mesh, one, 1.0), InputError);
    SeminormOptions tiny;
    tiny.max_pairs = 10;
    EXPECT_THROW(fractional_seminorm(mesh, one, 0.5, tiny), InputError);
}

TEST(SlopeFit, RecoversExactPowerLaw)
{
    std::vector<Row> rows;
    for (std::size_t n : {10u, 40u, 160u, 640u, 2560u, 10240u}) rows.push_back({n, 3.0 * std::pow(double(n), -0.75)});
    const auto fit = fit_slope(std::span<const Row>(rows), [](const Row & r) { return r.value; }, FitWindow::last(6));
    EXPECT_NEAR(fit.slope, -0.75, 1e-12);
    EXPECT_NEAR(std::exp(fit.intercept), 3.0, 1e-10);
    EXPECT_EQ(fit.first, 0u);
    EXPECT_EQ(fit.last, 6u);
}

TEST(SlopeFit, WindowsAndSkippedRecords)
{
    std::vector<Row> rows{{0, 1.0}, {4, 100.0}, {16, std::nullopt}, {64, 1.0 / 64}, {256, 1.0 / 256}, {1024, 1.0 / 1024}};
    // last half: records 3..5, a clean slope of -1
    const auto fit = fit_slope(std::span<const Row>(rows), [](const Row & r) { return r.value; });
    EXPECT_EQ(fit.first, 3u);
    EXPECT_NEAR(fit.slope, -1.0, 1e-12);
    // the whole history skips the empty value and the record without free nodes
    const auto all = fit_slope(std::span<const Row>(rows), [](const Row & r) { return r.value; }, FitWindow::last(100));
    EXPECT_EQ(all.first, 0u);
    EXPECT_LT(all.slope, -1.0);
    EXPECT_THROW(fit_slope(std::span<const Row>(rows), [](const Row & r) { return r.value; }, FitWindow::last(2)),
                 InputError);
}

TEST(FitWindow, Parse)
{
    EXPECT_EQ(FitWindow::parse("last-half").first(10), 5u);
    EXPECT_EQ(FitWindow::parse("last-3").first(10), 7u);
    EXPECT_EQ(FitWindow::parse("last-30").first(10), 0u);
    EXPECT_THROW(FitWindow::parse("last-"), InputError);
    EXPECT_THROW(FitWindow::parse("first-3"), InputError);
    EXPECT_THROW(FitWindow::parse("last--1"), InputError);
}

TEST(FitLogLog, RejectsDegenerateData)
{
    const std::vector<double> x{1, 2}, y{1, 2};
    EXPECT_THROW(fit_loglog(x, y), InputError);
    const std::vector<double> same{2, 2, 2}, val{1, 2, 3};
    EXPECT_THROW(fit_loglog(same, val), InputError);
    const std::vector<double> pos{1, 2, 3}, neg{1, -2, 3};
    EXPECT_THROW(fit_loglog(pos, neg), InputError);
}
