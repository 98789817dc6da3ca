#pragma once

#include <cstddef>
#include <vector>

#include "btm/errors.hpp"

namespace btm {

// Flat parameter vectors, gradients and displacements are all plain
// double vectors; dimension checks happen at the operation boundaries.
using Vector = std::vector<double>;

struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;  // row-major

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    double* row_ptr(std::size_t r) { return data.data() + r * cols; }
    const double* row_ptr(std::size_t r) const { return data.data() + r * cols; }

    Vector col(std::size_t j) const;
    void set_col(std::size_t j, const Vector& v);
    Vector row(std::size_t r) const;

    static Matrix identity(std::size_t n);
    static Matrix from_columns(const std::vector<Vector>& columns);
};

struct SvdResult {
    Vector singular_values;  // non-increasing, >= 0
    Matrix left_basis;       // column-orthonormal, rows x min(rows, cols)
    Matrix right_basis;      // column-orthonormal, cols x min(rows, cols)
};

// -------- vector helpers --------
double dot(const Vector& a, const Vector& b);
double norm(const Vector& a);
double norm_sq(const Vector& a);
void axpy(double alpha, const Vector& x, Vector& y);  // y += alpha * x
Vector add(const Vector& a, const Vector& b);
Vector sub(const Vector& a, const Vector& b);
Vector scaled(const Vector& a, double alpha);
bool all_finite(const Vector& a);
bool all_finite(const Matrix& a);
double frobenius_norm(const Matrix& a);

Matrix matmul(const Matrix& a, const Matrix& b);                // A * B
Matrix matmul_transposed_a(const Matrix& a, const Matrix& b);   // A^T * B
Matrix matmul_transposed_b(const Matrix& a, const Matrix& b);   // A * B^T
Vector matvec(const Matrix& a, const Vector& x);                // A * x
Vector matvec_transposed(const Matrix& a, const Vector& x);     // A^T * x

// -------- operations --------

// Column-orthonormal basis of the column space via modified Gram-Schmidt
// with re-orthogonalization. Columns whose residual norm after projection
// is <= tol * max_column_norm are dropped. An all-zero input yields an
// empty basis (cols == 0) with the row dimension preserved.
Matrix orthonormal_basis(const Matrix& columns, double tol);

// Orthogonal projection B * (B^T v) for a column-orthonormal basis B.
// An empty basis projects everything to zero.
Vector project_onto(const Matrix& span_basis, const Vector& v);

// One-sided Jacobi SVD. Deterministic for a fixed input; throws
// NumericalError if the sweep budget is exhausted before the relative
// column-orthogonality criterion is met.
SvdResult svd(const Matrix& a);

// Number of singular values above rel_tol * sigma_1.
std::size_t numerical_rank(const Vector& singular_values, double rel_tol = 1e-8);

}  // namespace btm
