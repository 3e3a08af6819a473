#pragma once

#include <stdexcept>
#include <string>

namespace afem {

/// Malformed or inconsistent user input (files, problem data, meshes).
class InputError : public std::runtime_error
{
public:
    explicit InputError(const std::string & what) : std::runtime_error(what) {}
};

/// A numerical procedure failed to reach its target (solver stagnation, closure runaway).
class NumericalError : public std::runtime_error
{
public:
    explicit NumericalError(const std::string & what, double residual = 0.0)
        : std::runtime_error(what), _residual(residual) {}

    double residual() const { return _residual; }

private:
    double _residual;
};

} // namespace afem
