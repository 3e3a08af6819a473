#pragma once

#include <afem/errors.hpp>
#include <afem/fem.hpp>
#include <afem/problem.hpp>
#include <afem/quadrature.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace afem {

/// -log|x| / (2 pi); +infinity at the origin.
inline double fundamental_value(Point2 p)
{
    const double r = norm(p);
    if (r == 0.0) return std::numeric_limits<double>::infinity();
    return -std::log(r) / (2.0 * std::numbers::pi);
}

inline Point2 fundamental_gradient(Point2 p)
{
    const double r2 = dot(p, p);
    if (r2 == 0.0) throw std::domain_error("gradient of the fundamental solution is undefined at the origin");
    return (-1.0 / (2.0 * std::numbers::pi * r2)) * p;
}

/// Solution of -Lap u = delta_0 in the plane; singular at the origin.
inline ExactSolution fundamental_solution()
{
    return {"fundamental", fundamental_value, fundamental_gradient, {Point2{0.0, 0.0}}};
}

namespace detail {
    inline bool closed_triangle_contains(const std::array<Point2, 3> & c, Point2 p, double tol = 1e-14)
    {
        const auto l = barycentric(c[0], c[1], c[2], p);
        return l[0] >= -tol && l[1] >= -tol && l[2] >= -tol;
    }

    /**
     * Separating-axis test for two convex polygons. Returns the smallest projection
     * overlap over all edge normals, relative to the size of the polygons: negative
     * when separated, zero when touching, positive when the interiors intersect.
     */
    inline double convex_overlap(std::span<const Point2> a, std::span<const Point2> b)
    {
        double scale = 0.0;
        for (auto p : a) scale = std::max({scale, std::abs(p.x), std::abs(p.y)});
        for (auto p : b) scale = std::max({scale, std::abs(p.x), std::abs(p.y)});
        double worst = std::numeric_limits<double>::infinity();
        const auto axes_of = [&](std::span<const Point2> poly) {
            for (std::size_t i = 0; i < poly.size(); ++i)
            {
                const Point2 d = poly[(i + 1) % poly.size()] - poly[i];
                const double len = norm(d);
                const Point2 axis{-d.y / len, d.x / len};
                double amin = std::numeric_limits<double>::infinity(), amax = -amin;
                double bmin = amin, bmax = -amin;
                for (auto p : a) amin = std::min(amin, dot(p, axis)), amax = std::max(amax, dot(p, axis));
                for (auto p : b) bmin = std::min(bmin, dot(p, axis)), bmax = std::max(bmax, dot(p, axis));
                worst = std::min(worst, std::min(amax, bmax) - std::max(amin, bmin));
            }
        };
        axes_of(a);
        axes_of(b);
        return worst / std::max(scale, 1e-300);
    }
}

/**
 * ||u - U||_{L2}. Cells whose closure holds a singular point of u are integrated
 * after `singular_levels` regular subdivisions.
 */
inline double l2_error(const DiscreteSolution & u, const ExactSolution & exact, int singular_levels = 4)
{
    const auto & mesh = *u.mesh;
    double total = 0.0;
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t)
    {
        const int ti = static_cast<int>(t);
        const auto c = mesh.corners(ti);
        int levels = 0;
        for (auto p : exact.singular_points)
            if (detail::closed_triangle_contains(c, p)) levels = singular_levels;
        total += quadrature::integrate(mesh.area(ti), levels, [&](const std::array<double, 3> & l) {
            const double diff = exact.value(from_barycentric(c[0], c[1], c[2], l)) - evaluate(u, ti, l);
            return diff * diff;
        });
    }
    return std::sqrt(total);
}

/// The diamond |x| + |y| <= radius around the origin excluded from the H1 error.
inline std::array<Point2, 4> diamond(double radius)
{
    return {Point2{radius, 0.0}, Point2{0.0, radius}, Point2{-radius, 0.0}, Point2{0.0, -radius}};
}

/**
 * |u - U|_{H1} over the cells lying in { |x| + |y| >= radius }. Cells whose interior
 * meets the diamond are left out entirely.
 */
inline double h1_error_off_singularity(const DiscreteSolution & u, const ExactSolution & exact, double radius = 0.25)
{
    const auto & mesh = *u.mesh;
    const auto excluded = diamond(radius);
    double total = 0.0;
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t)
    {
        const int ti = static_cast<int>(t);
        const auto c = mesh.corners(ti);
        if (detail::convex_overlap(c, excluded) > 1e-13) continue;
        total += quadrature::integrate(mesh.area(ti), 0, [&](const std::array<double, 3> & l) {
            const Point2 d = exact.gradient(from_barycentric(c[0], c[1], c[2], l)) - gradient(u, ti, l);
            return dot(d, d);
        });
    }
    return std::sqrt(total);
}

struct SeminormOptions
{
    /// Recursive subdivision depth for pairs of touching cells.
    int levels = 3;
    /// Refuse meshes with more ordered cell pairs than this.
    std::size_t max_pairs = 1u << 20;
    /// Point pairs closer than this are skipped.
    double min_separation = 1e-10;
    /// Visit pairs in reverse order with the roles of x and y exchanged.
    bool reverse_order = false;
};

namespace detail {
    template <class F>
    struct SeminormPairIntegrator
    {
        const Triangulation & mesh;
        F & f;
        double exponent;
        const SeminormOptions & options;

        double operator()(int ta, const quadrature::SubTriangle & sa, int tb, const quadrature::SubTriangle & sb,
                          double area_a, double area_b, int level) const
        {
            const auto ca = mesh.corners(ta);
            const auto cb = mesh.corners(tb);
            if (level < options.levels && touching(ca, sa, cb, sb))
            {
                double sum = 0.0;
                const auto kids_a = quadrature::split(sa);
                const auto kids_b = quadrature::split(sb);
                for (const auto & ka : kids_a)
                    for (const auto & kb : kids_b)
                        sum += (*this)(ta, ka, tb, kb, area_a / 4.0, area_b / 4.0, level + 1);
                return sum;
            }
            std::array<Point2, 6> xa{}, xb{};
            std::array<double, 6> fa{}, fb{};
            for (std::size_t q = 0; q < 6; ++q)
            {
                const auto la = quadrature::combine(sa, quadrature::degree4[q].bary);
                const auto lb = quadrature::combine(sb, quadrature::degree4[q].bary);
                xa[q] = from_barycentric(ca[0], ca[1], ca[2], la);
                xb[q] = from_barycentric(cb[0], cb[1], cb[2], lb);
                fa[q] = f(ta, la);
                fb[q] = f(tb, lb);
            }
            double sum = 0.0;
            for (std::size_t p = 0; p < 6; ++p)
                for (std::size_t q = 0; q < 6; ++q)
                {
                    const double r = distance(xa[p], xb[q]);
                    if (r < options.min_separation) continue;
                    const double diff = fa[p] - fb[q];
                    sum += quadrature::degree4[p].weight * quadrature::degree4[q].weight * diff * diff
                         / std::pow(r, exponent);
                }
            return sum * area_a * area_b;
        }

        static bool touching(const std::array<Point2, 3> & ca, const quadrature::SubTriangle & sa,
                             const std::array<Point2, 3> & cb, const quadrature::SubTriangle & sb)
        {
            std::array<Point2, 3> pa{}, pb{};
            for (int k = 0; k < 3; ++k)
            {
                pa[k] = from_barycentric(ca[0], ca[1], ca[2], sa[k]);
                pb[k] = from_barycentric(cb[0], cb[1], cb[2], sb[k]);
            }
            return convex_overlap(pa, pb) >= -1e-12;
        }
    };
}

/**
 * Aronszajn-Slobodeckij seminorm
 *
 *     |v|_s^2 = int_G int_G |v(x) - v(y)|^2 / |x - y|^{2 + 2s} dx dy,   0 < s < 1,
 *
 * over the region covered by the mesh, for v given cellwise as f(t, bary). The
 * double integral is summed over ordered cell pairs with the tensorized degree-4
 * rule; pairs of touching cells (including a cell with itself) are recursively
 * subdivided, touching sub-pairs only, up to options.levels times.
 */
template <class F>
double fractional_seminorm(const Triangulation & mesh, F && f, double s, const SeminormOptions & options = {})
{
    if (!(s > 0.0 && s < 1.0)) throw InputError("seminorm order must lie in (0, 1)");
    const std::size_t nt = mesh.num_triangles();
    if (nt * nt > options.max_pairs)
        throw InputError("mesh has " + std::to_string(nt) + " triangles; the double integral visits "
                         + std::to_string(nt * nt) + " cell pairs, more than the cap of "
                         + std::to_string(options.max_pairs) + " (use a small mesh)");
    detail::SeminormPairIntegrator<std::remove_reference_t<F>> integrator{mesh, f, 2.0 + 2.0 * s, options};
    double total = 0.0;
    for (std::size_t n = 0; n < nt * nt; ++n)
    {
        const std::size_t k = options.reverse_order ? nt * nt - 1 - n : n;
        int a = static_cast<int>(k / nt);
        int b = static_cast<int>(k % nt);
        if (options.reverse_order) std::swap(a, b);
        total += integrator(a, quadrature::whole, b, quadrature::whole, mesh.area(a), mesh.area(b), 0);
    }
    return std::sqrt(total);
}

inline double fractional_seminorm(const DiscreteSolution & u, double s, const SeminormOptions & options = {})
{
    auto f = [&](int t, const std::array<double, 3> & l) { return evaluate(u, t, l); };
    return fractional_seminorm(*u.mesh, f, s, options);
}

/// Window of records used for a slope fit.
struct FitWindow
{
    enum class Kind { last_half, last_k };
    Kind kind = Kind::last_half;
    std::size_t k = 0;

    static FitWindow last_half() { return {}; }
    static FitWindow last(std::size_t k) { return {Kind::last_k, k}; }

    /// Parses "last-half" or "last-K".
    static FitWindow parse(const std::string & text)
    {
        if (text == "last-half") return last_half();
        if (text.rfind("last-", 0) == 0)
        {
            const std::string digits = text.substr(5);
            if (!digits.empty() && std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; }))
                return last(std::stoul(digits));
        }
        throw InputError("fit window must be 'last-half' or 'last-K', got '" + text + "'");
    }

    /// First index of the window among n records.
    std::size_t first(std::size_t n) const
    {
        if (kind == Kind::last_half) return n / 2;
        return n > k ? n - k : 0;
    }
};

struct SlopeFit
{
    double slope = 0.0;
    double intercept = 0.0;
    /// Record index range [first, last) the fit used.
    std::size_t first = 0;
    std::size_t last = 0;
};

/// Least squares line through (log x, log y). Needs at least 3 points, all positive.
inline SlopeFit fit_loglog(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size()) throw std::invalid_argument("fit_loglog: size mismatch");
    if (x.size() < 3) throw InputError("slope fit needs at least 3 points, got " + std::to_string(x.size()));
    const double n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw InputError("slope fit needs positive data");
        sx += std::log(x[i]);
        sy += std::log(y[i]);
    }
    const double mx = sx / n;
    const double my = sy / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        const double dx = std::log(x[i]) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(y[i]) - my);
    }
    if (sxx == 0.0) throw InputError("slope fit needs distinct abscissae");
    SlopeFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.last = x.size();
    return fit;
}

/**
 * Fits log(value) against log(ndofs) over a window of records. The selector
 * returns std::optional<double>; records without a value, and records of meshes
 * without free nodes, are skipped.
 */
template <class Record, class Selector>
SlopeFit fit_slope(std::span<const Record> records, Selector && select, FitWindow window = FitWindow::last_half())
{
    const std::size_t first = window.first(records.size());
    std::vector<double> x, y;
    for (std::size_t i = first; i < records.size(); ++i)
    {
        const std::optional<double> v = select(records[i]);
        if (!v || records[i].ndofs == 0) continue;
        x.push_back(static_cast<double>(records[i].ndofs));
        y.push_back(*v);
    }
    auto fit = fit_loglog(x, y);
    fit.first = first;
    fit.last = records.size();
    return fit;
}

} // namespace afem
