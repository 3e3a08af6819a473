// Command-line driver: adaptive solves, mesh checks and seminorm evaluation.

#include <afem/afem.hpp>

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <string>

namespace fs = std::filesystem;

namespace {

enum ExitCode { ok = 0, usage = 1, invalid_input = 2, numerical_failure = 3 };

struct SolveOptions
{
    std::string problem;
    std::optional<double> theta;
    std::optional<std::size_t> max_dofs;
    std::optional<int> max_iters;
    std::optional<double> mark_factor;
    std::string out = ".";
    bool emit_meshes = false;
    bool emit_indicators = false;
    std::string fit_window = "last-half";
};

std::ofstream open_output(const fs::path & path)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

std::string numbered(const std::string & stem, int iteration)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "_%03d.txt", iteration);
    return stem + buf;
}

int run_solve(const SolveOptions & opt)
{
    auto spec = afem::read_problem_file(opt.problem);
    if (opt.theta) spec.theta = *opt.theta;
    for (const auto & w : afem::validate(spec)) std::cerr << "warning: " << w << '\n';

    auto config = afem::AdaptiveConfig::for_problem(spec);
    if (opt.max_dofs) config.max_dofs = *opt.max_dofs;
    if (opt.max_iters) config.max_iterations = *opt.max_iters;
    if (opt.mark_factor) config.mark_factor = *opt.mark_factor;
    config.validate();
    const auto window = afem::FitWindow::parse(opt.fit_window);

    const fs::path dir(opt.out);
    fs::create_directories(dir);

    const auto observer = [&](const afem::IterationView & view) {
        const auto & r = view.record;
        std::printf("iter %3d  ndofs %7zu  eta %.6e  xi %.6e  h_min %.3e\n", r.iteration, r.ndofs, r.eta, r.xi,
                    r.h_min);
        if (opt.emit_meshes)
        {
            auto out = open_output(dir / numbered("mesh", view.iteration));
            afem::write_mesh(out, view.mesh);
        }
        if (opt.emit_indicators)
        {
            auto eta = open_output(dir / numbered("indicators", view.iteration));
            afem::write_indicators(eta, view.indicators);
            auto xi = open_output(dir / numbered("oscillation", view.iteration));
            afem::write_oscillation(xi, view.oscillation);
        }
    };
    const auto result = afem::adapt(spec, config, observer);

    {
        auto out = open_output(dir / "history.csv");
        afem::write_history_csv(out, result.records);
    }
    {
        auto out = open_output(dir / "plot.dat");
        afem::write_plot_data(out, result.records);
    }
    const auto slopes = afem::fit_history(result.records, window);
    {
        auto out = open_output(dir / "slopes.txt");
        afem::write_slopes(out, slopes);
    }
    std::printf("status %s after %zu solves\n", afem::to_string(result.status), result.records.size());
    for (const auto & q : slopes)
        if (q.fit) std::printf("slope %-10s %.4f\n", q.name.c_str(), q.fit->slope);
    return ok;
}

int run_check_mesh(const std::string & path)
{
    const auto mesh = afem::read_mesh_file(path);
    const auto problems = afem::check_invariants(mesh);
    const auto m = afem::mesh_metrics(mesh);
    std::printf("vertices %zu  triangles %zu  edges %zu\n", mesh.num_vertices(), mesh.num_triangles(),
                mesh.num_edges());
    std::printf("area %.17g\n", mesh.total_area());
    std::printf("h_min %.6e  h_max %.6e  min_angle %.4f deg  min_area %.6e\n", m.h_min, m.h_max,
                m.min_angle_degrees(), m.min_area);
    for (const auto & p : problems) std::printf("violation: %s\n", p.c_str());
    if (!problems.empty()) return invalid_input;
    std::printf("ok\n");
    return ok;
}

const std::map<std::string, std::function<double(afem::Point2)>> & seminorm_functions()
{
    static const std::map<std::string, std::function<double(afem::Point2)>> table{
        {"one", [](afem::Point2) { return 1.0; }},
        {"x", [](afem::Point2 p) { return p.x; }},
        {"y", [](afem::Point2 p) { return p.y; }},
        {"xy", [](afem::Point2 p) { return p.x * p.y; }},
        {"r2", [](afem::Point2 p) { return p.x * p.x + p.y * p.y; }},
        {"sin", [](afem::Point2 p) { return std::sin(std::numbers::pi * p.x) * std::sin(std::numbers::pi * p.y); }},
    };
    return table;
}

int run_seminorm(const std::string & path, double s, const std::string & tag)
{
    const auto & table = seminorm_functions();
    const auto it = table.find(tag);
    if (it == table.end())
    {
        std::string known;
        for (const auto & [name, fn] : table) known += (known.empty() ? "" : ", ") + name;
        throw afem::InputError("unknown function tag '" + tag + "' (known: " + known + ")");
    }
    const auto mesh = afem::read_mesh_file(path);
    const auto & fn = it->second;
    auto f = [&](int t, const std::array<double, 3> & l) {
        const auto c = mesh.corners(t);
        return fn(afem::from_barycentric(c[0], c[1], c[2], l));
    };
    std::printf("%.17g\n", afem::fractional_seminorm(mesh, f, s));
    return ok;
}

} // namespace

int main(int argc, char ** argv)
{
    CLI::App app{"Adaptive P1/P2 finite elements for Poisson problems with point sources"};
    app.require_subcommand(1);

    SolveOptions solve;
    auto * solve_cmd = app.add_subcommand("solve", "Run the adaptive loop on a problem file");
    solve_cmd->add_option("problem-file", solve.problem, "Problem description")->required();
    solve_cmd->add_option("--theta", solve.theta, "Estimator weight exponent");
    solve_cmd->add_option("--max-dofs", solve.max_dofs, "Stop once this many free DOFs are reached");
    solve_cmd->add_option("--max-iters", solve.max_iters, "Maximum number of refinements");
    solve_cmd->add_option("--mark-factor", solve.mark_factor, "Maximum-marking factor gamma");
    solve_cmd->add_option("--out", solve.out, "Output directory")->capture_default_str();
    solve_cmd->add_flag("--emit-meshes", solve.emit_meshes, "Write the mesh of every iteration");
    solve_cmd->add_flag("--emit-indicators", solve.emit_indicators, "Write indicator dumps of every iteration");
    solve_cmd->add_option("--fit-window", solve.fit_window, "last-half or last-K")->capture_default_str();

    std::string mesh_file;
    auto * check_cmd = app.add_subcommand("check-mesh", "Validate a mesh file and print its metrics");
    check_cmd->add_option("mesh-file", mesh_file, "Mesh file")->required();

    std::string seminorm_mesh;
    double seminorm_s = 0.5;
    std::string seminorm_tag;
    auto * seminorm_cmd = app.add_subcommand("seminorm", "Fractional seminorm of a test function on a mesh");
    seminorm_cmd->add_option("mesh-file", seminorm_mesh, "Mesh file")->required();
    seminorm_cmd->add_option("s", seminorm_s, "Order in (0, 1)")->required();
    seminorm_cmd->add_option("function-tag", seminorm_tag, "one, x, y, xy, r2 or sin")->required();

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError & e)
    {
        const int code = app.exit(e);
        return code == 0 ? ok : usage;
    }

    try
    {
        if (*solve_cmd) return run_solve(solve);
        if (*check_cmd) return run_check_mesh(mesh_file);
        if (*seminorm_cmd) return run_seminorm(seminorm_mesh, seminorm_s, seminorm_tag);
    }
    catch (const afem::InputError & e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return invalid_input;
    }
    catch (const afem::NumericalError & e)
    {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return numerical_failure;
    }
    catch (const std::exception & e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return numerical_failure;
    }
    return usage;
}
