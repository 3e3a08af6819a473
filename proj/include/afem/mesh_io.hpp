#pragma once

#include <afem/errors.hpp>
#include <afem/mesh.hpp>

#include <cmath>
#include <cstdio>
#include <map>
#include <utility>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace afem {

/// Formats a double with 17 significant digits, enough to round-trip binary64.
inline std::string format_real(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/**
 * Mesh text format:
 *
 *     NV NT
 *     x y boundary_flag        (NV lines)
 *     i0 i1 i2 refedge         (NT lines, 0-based; refedge is the local edge
 *                               opposite vertex i_refedge)
 */
inline void write_mesh(std::ostream & out, const Triangulation & mesh)
{
    out << mesh.num_vertices() << ' ' << mesh.num_triangles() << '\n';
    for (std::size_t v = 0; v < mesh.num_vertices(); ++v)
    {
        const Point2 p = mesh.point(static_cast<int>(v));
        out << format_real(p.x) << ' ' << format_real(p.y) << ' '
            << (mesh.is_boundary_vertex(static_cast<int>(v)) ? 1 : 0) << '\n';
    }
    for (const auto & c : mesh.cells())
        out << c.vertices[0] << ' ' << c.vertices[1] << ' ' << c.vertices[2] << ' ' << c.refinement_edge << '\n';
}

inline void write_mesh_file(const std::string & path, const Triangulation & mesh)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    write_mesh(out, mesh);
    if (!out) throw std::runtime_error("failed writing " + path);
}

/**
 * Reads the mesh text format. Vertices closer than dedup_tol to an earlier vertex
 * are merged into it. Throws InputError on malformed content.
 */
inline Triangulation read_mesh(std::istream & in, double dedup_tol = 1e-12)
{
    std::string line;
    int line_no = 0;
    const auto next_line = [&](const char * what) {
        while (std::getline(in, line))
        {
            ++line_no;
            const auto first = line.find_first_not_of(" \t\r");
            if (first != std::string::npos && line[first] != '#') return;
        }
        throw InputError(std::string("unexpected end of mesh file while reading ") + what);
    };
    const auto fail = [&](const std::string & msg) {
        throw InputError("mesh line " + std::to_string(line_no) + ": " + msg);
    };

    next_line("header");
    long nv = -1;
    long nt = -1;
    {
        std::istringstream s(line);
        if (!(s >> nv >> nt) || nv < 3 || nt < 1) fail("expected header 'NV NT'");
    }

    std::vector<Point2> vertices;
    std::vector<bool> boundary;
    std::vector<int> remap(static_cast<std::size_t>(nv));
    std::map<std::pair<long long, long long>, std::vector<int>> buckets;
    for (long i = 0; i < nv; ++i)
    {
        next_line("vertices");
        std::istringstream s(line);
        Point2 p;
        int flag = -1;
        if (!(s >> p.x >> p.y >> flag) || (flag != 0 && flag != 1)) fail("expected 'x y boundary_flag'");
        if (!is_finite(p)) fail("non-finite coordinate");
        const long long bx = static_cast<long long>(std::floor(p.x / dedup_tol));
        const long long by = static_cast<long long>(std::floor(p.y / dedup_tol));
        int found = -1;
        for (long long dx = -1; dx <= 1 && found < 0; ++dx)
            for (long long dy = -1; dy <= 1 && found < 0; ++dy)
            {
                const auto it = buckets.find({bx + dx, by + dy});
                if (it == buckets.end()) continue;
                for (int j : it->second)
                    if (std::abs(vertices[j].x - p.x) <= dedup_tol && std::abs(vertices[j].y - p.y) <= dedup_tol)
                    {
                        found = j;
                        break;
                    }
            }
        if (found >= 0)
        {
            remap[static_cast<std::size_t>(i)] = found;
            if (flag) boundary[static_cast<std::size_t>(found)] = true;
            continue;
        }
        remap[static_cast<std::size_t>(i)] = static_cast<int>(vertices.size());
        buckets[{bx, by}].push_back(static_cast<int>(vertices.size()));
        vertices.push_back(p);
        boundary.push_back(flag == 1);
    }

    std::vector<Cell> cells;
    for (long t = 0; t < nt; ++t)
    {
        next_line("triangles");
        std::istringstream s(line);
        Cell c;
        long idx[3];
        if (!(s >> idx[0] >> idx[1] >> idx[2] >> c.refinement_edge)) fail("expected 'i0 i1 i2 refedge'");
        for (int k = 0; k < 3; ++k)
        {
            if (idx[k] < 0 || idx[k] >= nv) fail("vertex index out of range");
            c.vertices[k] = remap[static_cast<std::size_t>(idx[k])];
        }
        if (c.refinement_edge < 0 || c.refinement_edge > 2) fail("refedge must be 0, 1 or 2");
        cells.push_back(c);
    }
    return Triangulation(std::move(vertices), std::move(boundary), std::move(cells));
}

inline Triangulation read_mesh_file(const std::string & path)
{
    std::ifstream in(path);
    if (!in) throw InputError("cannot open mesh file " + path);
    return read_mesh(in);
}

} // namespace afem
