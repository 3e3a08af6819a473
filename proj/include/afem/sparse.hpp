#pragma once

#include <afem/errors.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace afem {

struct Triplet
{
    int row;
    int col;
    double value;
};

/// Compressed sparse row matrix with sorted, unique column indices per row.
class CsrMatrix
{
public:
    CsrMatrix() = default;

    /// Sums duplicate entries.
    static CsrMatrix from_triplets(int rows, int cols, std::vector<Triplet> entries)
    {
        std::sort(entries.begin(), entries.end(), [](const Triplet & a, const Triplet & b) {
            return a.row != b.row ? a.row < b.row : a.col < b.col;
        });
        CsrMatrix m;
        m._rows = rows;
        m._cols = cols;
        m._row_ptr.assign(static_cast<std::size_t>(rows) + 1, 0);
        for (std::size_t i = 0; i < entries.size();)
        {
            const int r = entries[i].row;
            const int c = entries[i].col;
            double sum = 0.0;
            for (; i < entries.size() && entries[i].row == r && entries[i].col == c; ++i) sum += entries[i].value;
            m._col.push_back(c);
            m._val.push_back(sum);
            ++m._row_ptr[static_cast<std::size_t>(r) + 1];
        }
        for (int r = 0; r < rows; ++r) m._row_ptr[r + 1] += m._row_ptr[r];
        return m;
    }

    static CsrMatrix identity(int n)
    {
        std::vector<Triplet> t;
        for (int i = 0; i < n; ++i) t.push_back({i, i, 1.0});
        return from_triplets(n, n, std::move(t));
    }

    int rows() const { return _rows; }
    int cols() const { return _cols; }
    std::size_t nonzeros() const { return _val.size(); }

    std::span<const int> row_cols(int r) const
    {
        return {_col.data() + _row_ptr[r], static_cast<std::size_t>(_row_ptr[r + 1] - _row_ptr[r])};
    }
    std::span<const double> row_values(int r) const
    {
        return {_val.data() + _row_ptr[r], static_cast<std::size_t>(_row_ptr[r + 1] - _row_ptr[r])};
    }

    double at(int r, int c) const
    {
        const auto cols = row_cols(r);
        const auto it = std::lower_bound(cols.begin(), cols.end(), c);
        if (it == cols.end() || *it != c) return 0.0;
        return row_values(r)[static_cast<std::size_t>(it - cols.begin())];
    }

    std::vector<double> diagonal() const
    {
        std::vector<double> d(static_cast<std::size_t>(_rows), 0.0);
        for (int r = 0; r < _rows; ++r) d[r] = at(r, r);
        return d;
    }

    void multiply(std::span<const double> x, std::span<double> y) const
    {
        for (int r = 0; r < _rows; ++r)
        {
            double sum = 0.0;
            for (int k = _row_ptr[r]; k < _row_ptr[r + 1]; ++k) sum += _val[k] * x[_col[k]];
            y[r] = sum;
        }
    }

    std::vector<double> operator*(std::span<const double> x) const
    {
        std::vector<double> y(static_cast<std::size_t>(_rows));
        multiply(x, y);
        return y;
    }

    bool is_symmetric() const
    {
        if (_rows != _cols) return false;
        for (int r = 0; r < _rows; ++r)
        {
            const auto cols = row_cols(r);
            const auto vals = row_values(r);
            for (std::size_t k = 0; k < cols.size(); ++k)
                if (at(cols[k], r) != vals[k]) return false;
        }
        return true;
    }

private:
    int _rows = 0;
    int _cols = 0;
    std::vector<int> _row_ptr{0};
    std::vector<int> _col;
    std::vector<double> _val;
};

struct CgResult
{
    std::vector<double> x;
    int iterations = 0;
    double relative_residual = 0.0;
};

struct CgOptions
{
    double tolerance = 1e-10;
    /// Iteration cap as a multiple of the system size.
    int max_iterations_per_dof = 50;
};

inline double dot(std::span<const double> a, std::span<const double> b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

/**
 * Jacobi-preconditioned conjugate gradients for a symmetric positive definite system.
 * Stops when ||b - A x|| <= tol ||b|| (true residual checked at exit). Throws
 * NumericalError carrying the final relative residual if the cap is reached.
 */
inline CgResult conjugate_gradient(const CsrMatrix & a, std::span<const double> b, CgOptions options = {},
                                   std::span<const double> initial_guess = {})
{
    const std::size_t n = b.size();
    CgResult result;
    result.x.assign(n, 0.0);
    if (initial_guess.size() == n) std::copy(initial_guess.begin(), initial_guess.end(), result.x.begin());
    auto & x = result.x;

    const double bnorm = std::sqrt(dot(b, b));
    if (bnorm == 0.0)
    {
        std::fill(x.begin(), x.end(), 0.0);
        return result;
    }
    const auto diag = a.diagonal();
    std::vector<double> inv_diag(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        if (!(diag[i] > 0.0))
            throw NumericalError("matrix has nonpositive diagonal entry at row " + std::to_string(i));
        inv_diag[i] = 1.0 / diag[i];
    }

    std::vector<double> r(n), z(n), p(n), q(n);
    a.multiply(x, r);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
    const long cap = static_cast<long>(options.max_iterations_per_dof) * static_cast<long>(std::max<std::size_t>(n, 1));
    const double target = options.tolerance * bnorm;
    double rnorm = std::sqrt(dot(r, r));
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    p = z;
    double rz = dot(r, z);

    long it = 0;
    while (true)
    {
        if (rnorm <= target)
        {
            // guard against drift of the recursive residual
            a.multiply(x, q);
            double true_norm = 0.0;
            for (std::size_t i = 0; i < n; ++i) true_norm += (b[i] - q[i]) * (b[i] - q[i]);
            true_norm = std::sqrt(true_norm);
            if (true_norm <= target)
            {
                rnorm = true_norm;
                break;
            }
            for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - q[i];
            rnorm = true_norm;
            for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
            p = z;
            rz = dot(r, z);
        }
        if (it >= cap)
            throw NumericalError("conjugate gradients did not converge in " + std::to_string(cap)
                                     + " iterations, relative residual " + std::to_string(rnorm / bnorm),
                                 rnorm / bnorm);
        a.multiply(p, q);
        const double alpha = rz / dot(p, q);
        for (std::size_t i = 0; i < n; ++i)
        {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
        const double rz_next = dot(r, z);
        const double beta = rz_next / rz;
        rz = rz_next;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
        rnorm = std::sqrt(dot(r, r));
        ++it;
    }
    result.iterations = static_cast<int>(it);
    result.relative_residual = rnorm / bnorm;
    return result;
}

} // namespace afem
