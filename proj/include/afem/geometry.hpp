#pragma once

#include <afem/errors.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace afem {

struct Point2
{
    double x = 0.0;
    double y = 0.0;

    friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
    friend Point2 operator*(Point2 a, double s) { return {s * a.x, s * a.y}; }
    friend bool operator==(Point2 a, Point2 b) { return a.x == b.x && a.y == b.y; }
    friend bool operator!=(Point2 a, Point2 b) { return !(a == b); }
};

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }
inline Point2 midpoint(Point2 a, Point2 b) { return {0.5 * (a.x + b.x), 0.5 * (a.y + b.y)}; }
inline bool is_finite(Point2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

inline std::string to_string(Point2 p)
{
    std::ostringstream out;
    out.precision(17);
    out << "(" << p.x << ", " << p.y << ")";
    return out.str();
}

/// Twice the signed area of (a, b, c); positive for counterclockwise order.
inline double orient2d(Point2 a, Point2 b, Point2 c) { return cross(b - a, c - a); }

inline double signed_area(Point2 a, Point2 b, Point2 c) { return 0.5 * orient2d(a, b, c); }

/// Barycentric coordinates of p with respect to the triangle (a, b, c).
inline std::array<double, 3> barycentric(Point2 a, Point2 b, Point2 c, Point2 p)
{
    const double det = orient2d(a, b, c);
    const double l1 = orient2d(p, b, c) / det;
    const double l2 = orient2d(a, p, c) / det;
    return {l1, l2, 1.0 - l1 - l2};
}

inline Point2 from_barycentric(Point2 a, Point2 b, Point2 c, const std::array<double, 3> & l)
{
    return {l[0] * a.x + l[1] * b.x + l[2] * c.x, l[0] * a.y + l[1] * b.y + l[2] * c.y};
}

inline double distance_to_segment(Point2 p, Point2 a, Point2 b)
{
    const Point2 ab = b - a;
    const double len2 = dot(ab, ab);
    if (len2 == 0.0) return distance(p, a);
    const double t = dot(p - a, ab) / len2;
    if (t <= 0.0) return distance(p, a);
    if (t >= 1.0) return distance(p, b);
    return std::abs(cross(ab, p - a)) / std::sqrt(len2);
}

/// Interior angles of the triangle (a, b, c) in radians, at a, b and c respectively.
inline std::array<double, 3> interior_angles(Point2 a, Point2 b, Point2 c)
{
    const auto angle = [](Point2 at, Point2 u, Point2 v) {
        const Point2 d1 = u - at;
        const Point2 d2 = v - at;
        return std::atan2(std::abs(cross(d1, d2)), dot(d1, d2));
    };
    return {angle(a, b, c), angle(b, c, a), angle(c, a, b)};
}

namespace detail {
    inline bool segments_intersect(Point2 p1, Point2 p2, Point2 q1, Point2 q2)
    {
        const double d1 = orient2d(q1, q2, p1);
        const double d2 = orient2d(q1, q2, p2);
        const double d3 = orient2d(p1, p2, q1);
        const double d4 = orient2d(p1, p2, q2);
        if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
            return true;
        const auto on_segment = [](Point2 a, Point2 b, Point2 p) {
            return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x)
                && std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
        };
        if (d1 == 0 && on_segment(q1, q2, p1)) return true;
        if (d2 == 0 && on_segment(q1, q2, p2)) return true;
        if (d3 == 0 && on_segment(p1, p2, q1)) return true;
        if (d4 == 0 && on_segment(p1, p2, q2)) return true;
        return false;
    }
}

enum class DomainTag { custom, square, lshape };

/**
 * A simple polygon given by its vertices in counterclockwise order.
 *
 * The builtin square is (-1,1)^2. The builtin L-shape is (-1,1)^2 with the
 * quadrant [0,1) x (-1,0] removed.
 */
class PolygonalDomain
{
public:
    PolygonalDomain() = default;

    /// Validates the polygon and reorders it counterclockwise. Throws InputError.
    explicit PolygonalDomain(std::vector<Point2> vertices, DomainTag tag = DomainTag::custom)
        : _vertices(std::move(vertices)), _tag(tag)
    {
        validate_and_orient();
    }

    static PolygonalDomain square()
    {
        return PolygonalDomain({{-1, -1}, {1, -1}, {1, 1}, {-1, 1}}, DomainTag::square);
    }

    static PolygonalDomain lshape()
    {
        return PolygonalDomain({{-1, -1}, {0, -1}, {0, 0}, {1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}},
                               DomainTag::lshape);
    }

    const std::vector<Point2> & vertices() const { return _vertices; }
    DomainTag tag() const { return _tag; }
    std::size_t size() const { return _vertices.size(); }

    double area() const
    {
        double twice = 0.0;
        for (std::size_t i = 0; i < _vertices.size(); ++i)
            twice += cross(_vertices[i], _vertices[(i + 1) % _vertices.size()]);
        return 0.5 * twice;
    }

    double distance_to_boundary(Point2 p) const
    {
        double d = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < _vertices.size(); ++i)
            d = std::min(d, distance_to_segment(p, _vertices[i], _vertices[(i + 1) % _vertices.size()]));
        return d;
    }

    /// Closed containment by winding number; boundary points count as inside.
    bool contains(Point2 p) const
    {
        if (distance_to_boundary(p) == 0.0) return true;
        int winding = 0;
        for (std::size_t i = 0; i < _vertices.size(); ++i)
        {
            const Point2 a = _vertices[i];
            const Point2 b = _vertices[(i + 1) % _vertices.size()];
            if (a.y <= p.y)
            {
                if (b.y > p.y && orient2d(a, b, p) > 0) ++winding;
            }
            else if (b.y <= p.y && orient2d(a, b, p) < 0)
            {
                --winding;
            }
        }
        return winding != 0;
    }

    /// Open containment: inside and at positive distance from the boundary.
    bool contains_strictly(Point2 p, double margin = 0.0) const
    {
        return contains(p) && distance_to_boundary(p) > margin;
    }

private:
    void validate_and_orient()
    {
        const std::size_t n = _vertices.size();
        if (n < 3) throw InputError("polygon needs at least 3 vertices");
        for (const auto & v : _vertices)
            if (!is_finite(v)) throw InputError("polygon vertex " + to_string(v) + " is not finite");
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                if (_vertices[i] == _vertices[j])
                    throw InputError("polygon has repeated vertex " + to_string(_vertices[i]));
        for (std::size_t i = 0; i < n; ++i)
        {
            const Point2 a = _vertices[i];
            const Point2 b = _vertices[(i + 1) % n];
            for (std::size_t j = i + 1; j < n; ++j)
            {
                // adjacent edges share one endpoint; only check for overlap there
                const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
                const Point2 c = _vertices[j];
                const Point2 d = _vertices[(j + 1) % n];
                if (adjacent)
                {
                    const Point2 shared = (j == i + 1) ? b : a;
                    const Point2 u = (j == i + 1) ? a : b;
                    const Point2 w = (j == i + 1) ? d : c;
                    if (orient2d(shared, u, w) == 0.0 && dot(u - shared, w - shared) > 0.0)
                        throw InputError("polygon edges overlap at " + to_string(shared));
                    continue;
                }
                if (detail::segments_intersect(a, b, c, d))
                    throw InputError("polygon is not simple: edges " + std::to_string(i) + " and "
                                     + std::to_string(j) + " intersect");
            }
        }
        const double a = area();
        if (a == 0.0 || !std::isfinite(a)) throw InputError("polygon has zero area");
        if (a < 0.0) std::reverse(_vertices.begin(), _vertices.end());
    }

    std::vector<Point2> _vertices;
    DomainTag _tag = DomainTag::custom;
};

} // namespace afem
