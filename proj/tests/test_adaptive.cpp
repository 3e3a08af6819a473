#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace afem;

namespace {

IndicatorField field_of(std::vector<double> eta)
{
    IndicatorField f;
    for (double e : eta) f.eta_sq.push_back(e * e);
    return f;
}

ProblemSpec three_source_problem(double theta)
{
    ProblemSpec spec;
    spec.domain = PolygonalDomain::lshape();
    spec.sources = {{{0.33, 0.66}, 1.0}, {{-0.251, -0.85}, 1.0}, {{-0.25, -0.87}, 1.0}};
    spec.theta = theta;
    return spec;
}

ProblemSpec fundamental_problem(double theta)
{
    ProblemSpec spec;
    spec.domain = PolygonalDomain::square();
    spec.sources = {{{0, 0}, 1.0}};
    spec.boundary_data = fundamental_value;
    spec.exact = fundamental_solution();
    spec.theta = theta;
    return spec;
}

AdaptiveConfig config_with(double theta, int iterations)
{
    AdaptiveConfig c;
    c.theta = theta;
    c.max_iterations = iterations;
    return c;
}

} // namespace

TEST(MarkMaximum, StrictThreshold)
{
    EXPECT_EQ(mark_maximum(field_of({2.0, 1.5, 0.5}), 0.5), (std::vector<int>{0, 1}));
    EXPECT_EQ(mark_maximum(field_of({1.0, 1.0, 1.0}), 0.5), (std::vector<int>{0, 1, 2}));
    EXPECT_TRUE(mark_maximum(field_of({0.0, 0.0}), 0.5).empty());
    // exactly at the threshold is not marked
    EXPECT_EQ(mark_maximum(field_of({2.0, 1.0}), 0.5), (std::vector<int>{0}));
}

TEST(MarkOscillation, StarsOfActiveVertices)
{
    const auto mesh = initial_mesh(PolygonalDomain::square());
    OscillationField osc;
    osc.xi.assign(mesh.num_vertices(), 0.0);
    EXPECT_TRUE(mark_oscillation(mesh, osc).empty());
    osc.xi[0] = 0.1;
    const auto star = mesh.vertex_triangles(0);
    EXPECT_EQ(mark_oscillation(mesh, osc), std::vector<int>(star.begin(), star.end()));
}

TEST(AdaptiveConfig, Validation)
{
    AdaptiveConfig c;
    EXPECT_NO_THROW(c.validate());
    c.mark_factor = 1.0;
    EXPECT_THROW(c.validate(), InputError);
    c = {};
    c.max_iterations = -1;
    EXPECT_THROW(c.validate(), InputError);
    c = {};
    c.max_dofs = 0;
    EXPECT_THROW(c.validate(), InputError);
}

TEST(Adapt, HomogeneousProblemStopsImmediately)
{
    ProblemSpec spec;
    spec.domain = PolygonalDomain::lshape();
    const auto result = adapt(spec, config_with(0.25, 10));
    ASSERT_EQ(result.records.size(), 1u);
    EXPECT_EQ(result.status, TerminationStatus::zero_estimator);
    EXPECT_EQ(result.records[0].eta, 0.0);
    EXPECT_EQ(result.records[0].xi, 0.0);
}

TEST(Adapt, ZeroIterationCapGivesOneRecord)
{
    const auto result = adapt(three_source_problem(0.25), config_with(0.25, 0));
    ASSERT_EQ(result.records.size(), 1u);
    EXPECT_EQ(result.status, TerminationStatus::max_iterations);
    EXPECT_EQ(result.records[0].iteration, 0);
}

TEST(Adapt, FreeNodeFreeInitialMeshStillRefines)
{
    // the initial L-shape mesh has no interior vertex, so U = 0 and eta = 0 while xi > 0
    const auto result = adapt(three_source_problem(0.25), config_with(0.25, 3));
    EXPECT_EQ(result.records[0].ndofs, 0u);
    EXPECT_EQ(result.records[0].eta, 0.0);
    EXPECT_GT(result.records[0].xi, 0.0);
    EXPECT_EQ(result.records.size(), 4u);
    EXPECT_GT(result.records.back().eta, 0.0);
}

TEST(Adapt, DeterministicNestedAndGrowing)
{
    std::vector<Triangulation> copies;
    const auto a = adapt(three_source_problem(0.375), config_with(0.375, 8),
                         [&](const IterationView & v) { copies.push_back(v.mesh); });
    const auto b = adapt(three_source_problem(0.375), config_with(0.375, 8));
    ASSERT_EQ(a.records.size(), b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) EXPECT_EQ(a.records[i], b.records[i]);
    EXPECT_TRUE(a.mesh->same_connectivity(*b.mesh));

    for (std::size_t i = 1; i < a.records.size(); ++i)
    {
        EXPECT_GE(a.records[i].ndofs, a.records[i - 1].ndofs);
        if (a.records[i - 1].ndofs > 0)
        {
            EXPECT_GT(a.records[i].ndofs, a.records[i - 1].ndofs);
        }
        EXPECT_LE(a.records[i].h_min, a.records[i - 1].h_min);
    }
    // nesting: every coarse vertex survives with the same index and coordinates
    ASSERT_EQ(copies.size(), a.records.size());
    for (std::size_t i = 1; i < copies.size(); ++i)
    {
        ASSERT_GT(copies[i].num_triangles(), copies[i - 1].num_triangles());
        for (std::size_t v = 0; v < copies[i - 1].num_vertices(); ++v)
            EXPECT_EQ(copies[i].point(static_cast<int>(v)), copies[i - 1].point(static_cast<int>(v)));
        EXPECT_TRUE(check_invariants(copies[i]).empty());
        EXPECT_NEAR(copies[i].total_area(), 3.0, 1e-12);
    }
}

TEST(Adapt, DofCapStops)
{
    AdaptiveConfig c = config_with(0.5, 100);
    c.max_dofs = 200;
    const auto result = adapt(three_source_problem(0.5), c);
    EXPECT_EQ(result.status, TerminationStatus::max_dofs);
    EXPECT_GE(result.records.back().ndofs, 200u);
    for (std::size_t i = 0; i + 1 < result.records.size(); ++i) EXPECT_LT(result.records[i].ndofs, 200u);
}

TEST(Adapt, AreaGuardStops)
{
    AdaptiveConfig c = config_with(0.5, 100);
    c.min_triangle_area = 1e-3;
    const auto result = adapt(fundamental_problem(0.5), c);
    EXPECT_EQ(result.status, TerminationStatus::min_area_guard);
    EXPECT_GE(mesh_metrics(*result.mesh).min_area, 1e-3);
}

TEST(Adapt, FundamentalSolutionRefinesTowardOrigin)
{
    int calls = 0;
    const auto result = adapt(fundamental_problem(0.25), config_with(0.25, 12), [&](const IterationView & v) {
        EXPECT_EQ(v.iteration, calls);
        EXPECT_EQ(v.indicators.eta_sq.size(), v.mesh.num_triangles());
        EXPECT_EQ(v.oscillation.xi.size(), v.mesh.num_vertices());
        EXPECT_EQ(v.record.iteration, calls);
        ++calls;
    });
    EXPECT_EQ(calls, static_cast<int>(result.records.size()));
    const auto & mesh = *result.mesh;
    // the smallest cell area is attained at the origin
    double at_origin = std::numeric_limits<double>::infinity();
    for (int t : containing_triangles(mesh, {0, 0})) at_origin = std::min(at_origin, mesh.area(t));
    EXPECT_EQ(at_origin, mesh_metrics(mesh).min_area);
    EXPECT_LT(at_origin, 4.0 / 4096);
    for (const auto & r : result.records)
    {
        ASSERT_TRUE(r.err_l2.has_value());
        ASSERT_TRUE(r.err_h1_off.has_value());
    }
    EXPECT_LT(*result.records.back().err_l2, *result.records.front().err_l2);
}

TEST(Adapt, ReportsStatusNames)
{
    EXPECT_STREQ(to_string(TerminationStatus::max_dofs), "max_dofs");
    EXPECT_STREQ(to_string(TerminationStatus::max_iterations), "max_iter");
    EXPECT_STREQ(to_string(TerminationStatus::zero_estimator), "zero_estimator");
    EXPECT_STREQ(to_string(TerminationStatus::min_area_guard), "min_area_guard");
}
