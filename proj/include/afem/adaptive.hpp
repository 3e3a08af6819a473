#pragma once

#include <afem/errors.hpp>
#include <afem/estimator.hpp>
#include <afem/fem.hpp>
#include <afem/mesh.hpp>
#include <afem/oscillation.hpp>
#include <afem/problem.hpp>
#include <afem/verification.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace afem {

struct AdaptiveConfig
{
    double theta = 0.25;
    /// Cells with eta_T > mark_factor * max eta are refined.
    double mark_factor = 0.5;
    int max_iterations = 100;
    std::size_t max_dofs = 100000;
    double solver_tol = 1e-10;
    /// Stop before accepting a refinement that creates a cell smaller than this.
    double min_triangle_area = 1e-16;

    static AdaptiveConfig for_problem(const ProblemSpec & spec)
    {
        AdaptiveConfig c;
        c.theta = spec.theta;
        return c;
    }

    void validate() const
    {
        if (!(mark_factor > 0.0 && mark_factor < 1.0)) throw InputError("mark factor must lie in (0, 1)");
        if (max_iterations < 0) throw InputError("iteration cap must be nonnegative");
        if (max_dofs == 0) throw InputError("DOF cap must be positive");
        if (!(solver_tol > 0.0)) throw InputError("solver tolerance must be positive");
        if (!(min_triangle_area >= 0.0)) throw InputError("minimum area guard must be nonnegative");
    }
};

/// One row of the adaptive history.
struct ConvergenceRecord
{
    int iteration = 0;
    std::size_t ndofs = 0;
    double eta = 0.0;
    double xi = 0.0;
    double h_min = 0.0;
    std::optional<double> err_l2;
    std::optional<double> err_h1_off;

    friend bool operator==(const ConvergenceRecord &, const ConvergenceRecord &) = default;
};

enum class TerminationStatus { max_dofs, max_iterations, zero_estimator, min_area_guard };

inline const char * to_string(TerminationStatus s)
{
    switch (s)
    {
    case TerminationStatus::max_dofs: return "max_dofs";
    case TerminationStatus::max_iterations: return "max_iter";
    case TerminationStatus::zero_estimator: return "zero_estimator";
    case TerminationStatus::min_area_guard: return "min_area_guard";
    }
    return "unknown";
}

/// State handed to an observer after the Estimate step of every iteration.
struct IterationView
{
    int iteration;
    const Triangulation & mesh;
    const DiscreteSolution & solution;
    const IndicatorField & indicators;
    const OscillationField & oscillation;
    const ConvergenceRecord & record;
};

struct AdaptiveResult
{
    std::vector<ConvergenceRecord> records;
    DiscreteSolution solution;
    std::shared_ptr<const Triangulation> mesh;
    TerminationStatus status = TerminationStatus::max_iterations;
};

/// Maximum strategy: { T : eta_T > gamma * max eta }. Empty iff all indicators vanish.
inline std::vector<int> mark_maximum(const IndicatorField & field, double gamma)
{
    double max_sq = 0.0;
    for (double e : field.eta_sq) max_sq = std::max(max_sq, e);
    std::vector<int> marked;
    if (max_sq == 0.0) return marked;
    const double threshold = gamma * std::sqrt(max_sq);
    for (std::size_t t = 0; t < field.eta_sq.size(); ++t)
        if (std::sqrt(field.eta_sq[t]) > threshold) marked.push_back(static_cast<int>(t));
    return marked;
}

/**
 * Fallback marking when every eta_T vanishes but the oscillation does not (e.g. a
 * mesh without free nodes): all cells in the stars of vertices with xi(z) > 0.
 */
inline std::vector<int> mark_oscillation(const Triangulation & mesh, const OscillationField & osc)
{
    std::vector<int> marked;
    for (std::size_t z = 0; z < osc.xi.size(); ++z)
        if (osc.xi[z] > 0.0)
            for (int t : mesh.vertex_triangles(static_cast<int>(z))) marked.push_back(t);
    std::sort(marked.begin(), marked.end());
    marked.erase(std::unique(marked.begin(), marked.end()), marked.end());
    return marked;
}

/// Raised when a solve inside the adaptive loop fails.
class AdaptiveSolveError : public NumericalError
{
public:
    AdaptiveSolveError(int iteration, const NumericalError & cause)
        : NumericalError("iteration " + std::to_string(iteration) + ": " + cause.what(), cause.residual()),
          _iteration(iteration) {}

    int iteration() const { return _iteration; }

private:
    int _iteration;
};

/**
 * Solve -> Estimate -> Mark -> Refine until a cap is reached, both the estimator and
 * the oscillation vanish, or refinement would produce a cell below the minimum area. One record is written
 * per solved mesh; the returned solution belongs to the last record.
 */
inline AdaptiveResult adapt(const ProblemSpec & spec, const AdaptiveConfig & config,
                            const std::function<void(const IterationView &)> & observer = {})
{
    config.validate();
    auto mesh = spec.initial_mesh ? spec.initial_mesh : std::make_shared<const Triangulation>(initial_mesh(spec.domain));
    AdaptiveResult result;
    std::vector<double> guess;

    for (int it = 0;; ++it)
    {
        DiscreteSolution u;
        try
        {
            u = solve_problem(mesh, spec, config.solver_tol, guess);
        }
        catch (const NumericalError & e)
        {
            throw AdaptiveSolveError(it, e);
        }
        auto field = estimate(u, config.theta);
        const auto osc = xi_global(*mesh, spec.sources, config.theta, spec.degree);
        field.xi_sq.resize(osc.xi.size());
        for (std::size_t z = 0; z < osc.xi.size(); ++z) field.xi_sq[z] = osc.xi[z] * osc.xi[z];
        field.global_xi = osc.global_xi;

        ConvergenceRecord rec;
        rec.iteration = it;
        rec.ndofs = u.dofs->num_free();
        rec.eta = field.global_eta;
        rec.xi = field.global_xi;
        rec.h_min = mesh_metrics(*mesh).h_min;
        if (spec.exact)
        {
            rec.err_l2 = l2_error(u, *spec.exact);
            rec.err_h1_off = h1_error_off_singularity(u, *spec.exact);
        }
        result.records.push_back(rec);
        if (observer) observer({it, *mesh, u, field, osc, result.records.back()});
        result.solution = u;
        result.mesh = mesh;

        if (field.global_eta == 0.0 && field.global_xi == 0.0)
        {
            result.status = TerminationStatus::zero_estimator;
            break;
        }
        if (rec.ndofs >= config.max_dofs)
        {
            result.status = TerminationStatus::max_dofs;
            break;
        }
        if (it >= config.max_iterations)
        {
            result.status = TerminationStatus::max_iterations;
            break;
        }
        auto marked = mark_maximum(field, config.mark_factor);
        if (marked.empty()) marked = mark_oscillation(*mesh, osc);
        auto refined = std::make_shared<const Triangulation>(bisect(*mesh, marked));
        if (mesh_metrics(*refined).min_area < config.min_triangle_area)
        {
            result.status = TerminationStatus::min_area_guard;
            break;
        }
        guess.clear();
        if (spec.degree == 1) guess = prolongate_vertices(u.coefficients, *refined);
        mesh = std::move(refined);
    }
    return result;
}

} // namespace afem
