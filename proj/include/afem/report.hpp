#pragma once

#include <afem/adaptive.hpp>
#include <afem/errors.hpp>
#include <afem/mesh_io.hpp>
#include <afem/verification.hpp>

#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace afem {

inline constexpr const char * history_header = "iter,ndofs,eta,xi,h_min,err_l2,err_h1_off";

/// Convergence history as CSV; error columns are empty when no exact solution is known.
inline void write_history_csv(std::ostream & out, std::span<const ConvergenceRecord> records)
{
    out << history_header << '\n';
    const auto opt = [](const std::optional<double> & v) { return v ? format_real(*v) : std::string(); };
    for (const auto & r : records)
        out << r.iteration << ',' << r.ndofs << ',' << format_real(r.eta) << ',' << format_real(r.xi) << ','
            << format_real(r.h_min) << ',' << opt(r.err_l2) << ',' << opt(r.err_h1_off) << '\n';
}

/// Columns for gnuplot: ndofs eta xi err_l2 err_h1_off, with NaN for missing values.
inline void write_plot_data(std::ostream & out, std::span<const ConvergenceRecord> records)
{
    out << "# ndofs eta xi err_l2 err_h1_off\n";
    const auto opt = [](const std::optional<double> & v) { return v ? format_real(*v) : std::string("NaN"); };
    for (const auto & r : records)
        out << r.ndofs << ' ' << format_real(r.eta) << ' ' << format_real(r.xi) << ' ' << opt(r.err_l2) << ' '
            << opt(r.err_h1_off) << '\n';
}

struct QuantitySlope
{
    std::string name;
    std::optional<SlopeFit> fit;
    std::string failure;
};

/// Log-log slopes of each recorded quantity against ndofs over the given window.
inline std::vector<QuantitySlope> fit_history(std::span<const ConvergenceRecord> records, FitWindow window)
{
    using Selector = std::optional<double> (*)(const ConvergenceRecord &);
    const std::pair<const char *, Selector> quantities[] = {
        {"eta", [](const ConvergenceRecord & r) -> std::optional<double> { return r.eta; }},
        {"xi", [](const ConvergenceRecord & r) -> std::optional<double> { return r.xi; }},
        {"err_l2", [](const ConvergenceRecord & r) { return r.err_l2; }},
        {"err_h1_off", [](const ConvergenceRecord & r) { return r.err_h1_off; }},
    };
    std::vector<QuantitySlope> out;
    for (const auto & [name, select] : quantities)
    {
        QuantitySlope q{name, std::nullopt, {}};
        try
        {
            q.fit = fit_slope(records, select, window);
        }
        catch (const InputError & e)
        {
            q.failure = e.what();
        }
        out.push_back(std::move(q));
    }
    return out;
}

inline void write_slopes(std::ostream & out, std::span<const QuantitySlope> slopes)
{
    out << "# quantity slope intercept first_iter last_iter\n";
    for (const auto & q : slopes)
    {
        if (q.fit)
            out << q.name << ' ' << format_real(q.fit->slope) << ' ' << format_real(q.fit->intercept) << ' '
                << q.fit->first << ' ' << q.fit->last << '\n';
        else
            out << q.name << " n/a  # " << q.failure << '\n';
    }
}

} // namespace afem
