#pragma once

#include <afem/adaptive.hpp>
#include <afem/errors.hpp>
#include <afem/estimator.hpp>
#include <afem/fem.hpp>
#include <afem/geometry.hpp>
#include <afem/mesh.hpp>
#include <afem/mesh_io.hpp>
#include <afem/oscillation.hpp>
#include <afem/problem.hpp>
#include <afem/problem_io.hpp>
#include <afem/quadrature.hpp>
#include <afem/report.hpp>
#include <afem/sparse.hpp>
#include <afem/verification.hpp>
