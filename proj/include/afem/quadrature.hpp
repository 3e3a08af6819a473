#pragma once

#include <afem/geometry.hpp>

#include <array>

namespace afem::quadrature {

struct Point
{
    std::array<double, 3> bary;
    /// Weight relative to the triangle area (weights sum to 1).
    double weight;
};

/// Symmetric six-point rule, exact for polynomials of degree 4.
inline constexpr std::array<Point, 6> degree4{{
    {{0.44594849091596488632, 0.44594849091596488632, 0.10810301816807022736}, 0.22338158967801146570},
    {{0.44594849091596488632, 0.10810301816807022736, 0.44594849091596488632}, 0.22338158967801146570},
    {{0.10810301816807022736, 0.44594849091596488632, 0.44594849091596488632}, 0.22338158967801146570},
    {{0.09157621350977074346, 0.09157621350977074346, 0.81684757298045851308}, 0.10995174365532186764},
    {{0.09157621350977074346, 0.81684757298045851308, 0.09157621350977074346}, 0.10995174365532186764},
    {{0.81684757298045851308, 0.09157621350977074346, 0.09157621350977074346}, 0.10995174365532186764},
}};

/// A sub-triangle described by the barycentric coordinates of its corners in a parent.
using SubTriangle = std::array<std::array<double, 3>, 3>;

inline constexpr SubTriangle whole{{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}}};

inline std::array<double, 3> combine(const SubTriangle & s, const std::array<double, 3> & l)
{
    std::array<double, 3> out{};
    for (int k = 0; k < 3; ++k) out[k] = l[0] * s[0][k] + l[1] * s[1][k] + l[2] * s[2][k];
    return out;
}

/// Regular split into four children (corners first, then the middle one).
inline std::array<SubTriangle, 4> split(const SubTriangle & s)
{
    const auto mid = [](const std::array<double, 3> & a, const std::array<double, 3> & b) {
        return std::array<double, 3>{0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]), 0.5 * (a[2] + b[2])};
    };
    const auto m01 = mid(s[0], s[1]);
    const auto m12 = mid(s[1], s[2]);
    const auto m20 = mid(s[2], s[0]);
    return {{{s[0], m01, m20}, {m01, s[1], m12}, {m20, m12, s[2]}, {m12, m20, m01}}};
}

/**
 * Integrates f(bary) over a triangle of the given area using `levels` regular
 * subdivisions and the degree-4 rule on each piece.
 */
template <class F>
double integrate(double area, int levels, F && f, const SubTriangle & s = whole)
{
    if (levels > 0)
    {
        double sum = 0.0;
        for (const auto & child : split(s)) sum += integrate(area / 4.0, levels - 1, f, child);
        return sum;
    }
    double sum = 0.0;
    for (const auto & q : degree4) sum += q.weight * f(combine(s, q.bary));
    return sum * area;
}

} // namespace afem::quadrature
