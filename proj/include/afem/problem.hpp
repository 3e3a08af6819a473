#pragma once

#include <afem/errors.hpp>
#include <afem/geometry.hpp>
#include <afem/mesh.hpp>

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace afem {

using ScalarField = std::function<double(Point2)>;
using VectorField = std::function<Point2(Point2)>;

/// A Dirac point source alpha * delta_x.
struct PointSource
{
    Point2 location;
    double weight = 0.0;
};

/// A closed-form solution used to measure errors.
struct ExactSolution
{
    std::string name;
    ScalarField value;
    VectorField gradient;
    /// Points where value or gradient blow up; quadrature refines around them.
    std::vector<Point2> singular_points;
};

/**
 * -Laplace(u) = sum_j alpha_j delta_{x_j} in the domain, u = boundary_data on its boundary.
 */
struct ProblemSpec
{
    PolygonalDomain domain;
    std::vector<PointSource> sources;
    double theta = 0.25;
    int degree = 1;
    /// Dirichlet data; empty means homogeneous.
    ScalarField boundary_data;
    std::optional<ExactSolution> exact;
    /// Overrides initial_mesh(domain) when set.
    std::shared_ptr<const Triangulation> initial_mesh;
    /// Permits theta in [0, 1) outside the analysed range (0, 1/2].
    bool allow_experimental_theta = false;
};

/**
 * Checks the invariants of a problem and returns warnings for values outside the
 * analysed range that are still accepted. Throws InputError on violations.
 */
inline std::vector<std::string> validate(const ProblemSpec & spec)
{
    std::vector<std::string> warnings;
    if (spec.degree != 1 && spec.degree != 2)
        throw InputError("degree must be 1 or 2, got " + std::to_string(spec.degree));
    if (!std::isfinite(spec.theta)) throw InputError("theta is not finite");
    if (spec.allow_experimental_theta)
    {
        if (spec.theta < 0.0 || spec.theta >= 1.0)
            throw InputError("theta must lie in [0, 1) even in experimental mode");
        if (spec.theta == 0.0 || spec.theta >= 0.5)
            warnings.push_back("theta = " + std::to_string(spec.theta) + " is not covered by the error analysis");
    }
    else
    {
        if (!(spec.theta > 0.0 && spec.theta <= 0.5))
            throw InputError("theta must lie in (0, 1/2], got " + std::to_string(spec.theta));
        if (spec.theta == 0.5) warnings.push_back("theta = 0.5 is not covered by the error analysis");
    }
    for (std::size_t j = 0; j < spec.sources.size(); ++j)
    {
        const auto & s = spec.sources[j];
        if (!is_finite(s.location) || !std::isfinite(s.weight))
            throw InputError("source " + std::to_string(j) + " has non-finite data");
        if (s.weight == 0.0) throw InputError("source " + std::to_string(j) + " has zero weight");
        if (!spec.domain.contains_strictly(s.location))
            throw InputError("source " + std::to_string(j) + " at " + to_string(s.location)
                             + " is not strictly inside the domain");
    }
    return warnings;
}

} // namespace afem
