#pragma once

#include <afem/errors.hpp>
#include <afem/geometry.hpp>
#include <afem/mesh.hpp>
#include <afem/mesh_io.hpp>
#include <afem/problem.hpp>
#include <afem/verification.hpp>

#include <cerrno>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace afem {

namespace detail {
    inline std::string trim(const std::string & s)
    {
        const auto first = s.find_first_not_of(" \t\r\n");
        if (first == std::string::npos) return {};
        const auto last = s.find_last_not_of(" \t\r\n");
        return s.substr(first, last - first + 1);
    }

    inline std::vector<double> parse_numbers(const std::string & text, int line)
    {
        std::vector<double> out;
        std::istringstream in(text);
        std::string token;
        while (in >> token)
        {
            errno = 0;
            char * end = nullptr;
            const double v = std::strtod(token.c_str(), &end);
            if (end == token.c_str() || *end != '\0' || errno == ERANGE || !std::isfinite(v))
                throw InputError("line " + std::to_string(line) + ": malformed number '" + token + "'");
            out.push_back(v);
        }
        return out;
    }

    inline bool parse_bool(const std::string & text, int line)
    {
        if (text == "true" || text == "1" || text == "yes") return true;
        if (text == "false" || text == "0" || text == "no") return false;
        throw InputError("line " + std::to_string(line) + ": expected true or false, got '" + text + "'");
    }
}

/**
 * Parses a problem description. One `key = value` assignment per line, `#` starts a
 * comment. Keys:
 *
 *     domain = square | lshape | polygon: x0 y0 x1 y1 ...
 *     source = x y alpha                  (repeatable)
 *     theta = r
 *     degree = 1 | 2
 *     exact = fundamental                 (boundary data and unit source at the origin)
 *     allow_experimental_theta = true | false
 *     mesh = path                         (initial triangulation, relative to base_dir)
 *
 * Errors carry the offending line number.
 */
inline ProblemSpec parse_problem(const std::string & text, const std::filesystem::path & base_dir = {})
{
    ProblemSpec spec;
    std::map<std::string, int> seen;
    std::vector<int> source_lines;
    std::optional<std::string> mesh_path;
    bool have_domain = false;

    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw))
    {
        ++line_no;
        if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
        const std::string line = detail::trim(raw);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw InputError("line " + std::to_string(line_no) + ": expected 'key = value'");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        const auto fail = [&](const std::string & msg) {
            throw InputError("line " + std::to_string(line_no) + ": " + msg);
        };
        if (key != "source")
        {
            if (seen.count(key)) fail("duplicate key '" + key + "'");
            seen[key] = line_no;
        }

        if (key == "domain")
        {
            have_domain = true;
            if (value == "square")
                spec.domain = PolygonalDomain::square();
            else if (value == "lshape")
                spec.domain = PolygonalDomain::lshape();
            else if (value.rfind("polygon:", 0) == 0)
            {
                const auto xs = detail::parse_numbers(value.substr(8), line_no);
                if (xs.size() % 2 != 0) fail("polygon needs an even number of coordinates");
                std::vector<Point2> pts;
                for (std::size_t i = 0; i < xs.size(); i += 2) pts.push_back({xs[i], xs[i + 1]});
                try
                {
                    spec.domain = PolygonalDomain(std::move(pts));
                }
                catch (const InputError & e)
                {
                    fail(e.what());
                }
            }
            else
                fail("unknown domain '" + value + "'");
        }
        else if (key == "source")
        {
            const auto xs = detail::parse_numbers(value, line_no);
            if (xs.size() != 3) fail("source needs 'x y alpha'");
            spec.sources.push_back({{xs[0], xs[1]}, xs[2]});
            source_lines.push_back(line_no);
        }
        else if (key == "theta")
        {
            const auto xs = detail::parse_numbers(value, line_no);
            if (xs.size() != 1) fail("theta needs one number");
            spec.theta = xs[0];
        }
        else if (key == "degree")
        {
            if (value == "1")
                spec.degree = 1;
            else if (value == "2")
                spec.degree = 2;
            else
                fail("degree must be 1 or 2");
        }
        else if (key == "exact")
        {
            if (value != "fundamental") fail("unknown exact solution '" + value + "'");
            spec.exact = fundamental_solution();
        }
        else if (key == "allow_experimental_theta")
            spec.allow_experimental_theta = detail::parse_bool(value, line_no);
        else if (key == "mesh")
            mesh_path = value;
        else
            fail("unknown key '" + key + "'");
    }

    if (!have_domain) throw InputError("problem has no 'domain' line");
    const auto at = [&](const std::string & key) { return seen.count(key) ? seen[key] : 0; };
    const auto line_msg = [](int line, const std::string & msg) {
        return line > 0 ? "line " + std::to_string(line) + ": " + msg : msg;
    };

    const double theta = spec.theta;
    if (spec.allow_experimental_theta ? !(theta >= 0.0 && theta < 1.0) : !(theta > 0.0 && theta <= 0.5))
        throw InputError(line_msg(at("theta"), "theta = " + std::to_string(theta) + " is outside "
                                                   + (spec.allow_experimental_theta ? "[0, 1)" : "(0, 1/2]")));
    for (std::size_t j = 0; j < spec.sources.size(); ++j)
    {
        if (spec.sources[j].weight == 0.0) throw InputError(line_msg(source_lines[j], "source weight must be nonzero"));
        if (!spec.domain.contains_strictly(spec.sources[j].location))
            throw InputError(line_msg(source_lines[j], "source " + to_string(spec.sources[j].location)
                                                           + " is not strictly inside the domain"));
    }

    if (spec.exact)
    {
        // -Lap u = delta_0 for the fundamental solution, plus its trace on the boundary
        const Point2 origin{0.0, 0.0};
        if (!spec.domain.contains_strictly(origin))
            throw InputError(line_msg(at("exact"), "the fundamental solution needs the origin inside the domain"));
        spec.boundary_data = spec.exact->value;
        bool has_origin = false;
        for (const auto & s : spec.sources) has_origin |= s.location == origin;
        if (!has_origin) spec.sources.push_back({origin, 1.0});
    }

    if (mesh_path)
    {
        const auto path = base_dir / *mesh_path;
        auto mesh = std::make_shared<const Triangulation>(read_mesh_file(path.string()));
        const double area = spec.domain.area();
        if (std::abs(mesh->total_area() - area) > 1e-12 * std::abs(area))
            throw InputError(line_msg(at("mesh"), "mesh " + path.string() + " does not cover the domain"));
        for (const auto & p : mesh->vertices())
            if (!spec.domain.contains(p))
                throw InputError(line_msg(at("mesh"), "mesh vertex " + to_string(p) + " lies outside the domain"));
        spec.initial_mesh = std::move(mesh);
    }

    validate(spec);
    return spec;
}

inline ProblemSpec read_problem_file(const std::filesystem::path & path)
{
    std::ifstream in(path);
    if (!in) throw InputError("cannot open problem file " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_problem(buffer.str(), path.parent_path());
}

} // namespace afem
