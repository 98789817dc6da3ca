#include "btm/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "btm/kernels.hpp"

namespace btm {

Vector Matrix::col(std::size_t j) const {
    Vector v(rows);
    for (std::size_t r = 0; r < rows; ++r) v[r] = data[r * cols + j];
    return v;
}

void Matrix::set_col(std::size_t j, const Vector& v) {
    for (std::size_t r = 0; r < rows; ++r) data[r * cols + j] = v[r];
}

Vector Matrix::row(std::size_t r) const {
    return Vector(data.begin() + r * cols, data.begin() + (r + 1) * cols);
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::from_columns(const std::vector<Vector>& columns) {
    if (columns.empty()) return Matrix();
    Matrix m(columns.front().size(), columns.size());
    for (std::size_t j = 0; j < columns.size(); ++j) {
        if (columns[j].size() != m.rows) throw DimError("from_columns: ragged column lengths");
        m.set_col(j, columns[j]);
    }
    return m;
}

double dot(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw DimError("dot: size mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

double norm_sq(const Vector& a) {
    double acc = 0.0;
    for (double x : a) acc += x * x;
    return acc;
}

double norm(const Vector& a) { return std::sqrt(norm_sq(a)); }

void axpy(double alpha, const Vector& x, Vector& y) {
    if (x.size() != y.size()) throw DimError("axpy: size mismatch");
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

Vector add(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw DimError("add: size mismatch");
    Vector r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

Vector sub(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw DimError("sub: size mismatch");
    Vector r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

Vector scaled(const Vector& a, double alpha) {
    Vector r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = alpha * a[i];
    return r;
}

bool all_finite(const Vector& a) {
    for (double x : a) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

bool all_finite(const Matrix& a) {
    for (double x : a.data) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

double frobenius_norm(const Matrix& a) {
    double acc = 0.0;
    for (double x : a.data) acc += x * x;
    return std::sqrt(acc);
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows) throw DimError("matmul: inner dimensions disagree");
    Matrix c(a.rows, b.cols);
    kernels::gemm_nn(a.data.data(), b.data.data(), c.data.data(), a.rows, a.cols, b.cols);
    return c;
}

Matrix matmul_transposed_a(const Matrix& a, const Matrix& b) {
    if (a.rows != b.rows) throw DimError("matmul_transposed_a: row counts disagree");
    Matrix c(a.cols, b.cols);
    kernels::gemm_tn(a.data.data(), b.data.data(), c.data.data(), a.cols, a.rows, b.cols);
    return c;
}

Matrix matmul_transposed_b(const Matrix& a, const Matrix& b) {
    if (a.cols != b.cols) throw DimError("matmul_transposed_b: column counts disagree");
    Matrix c(a.rows, b.rows);
    kernels::gemm_nt(a.data.data(), b.data.data(), c.data.data(), a.rows, a.cols, b.rows);
    return c;
}

Vector matvec(const Matrix& a, const Vector& x) {
    if (a.cols != x.size()) throw DimError("matvec: dimension mismatch");
    Vector y(a.rows, 0.0);
    kernels::gemm_nn(a.data.data(), x.data(), y.data(), a.rows, a.cols, 1);
    return y;
}

Vector matvec_transposed(const Matrix& a, const Vector& x) {
    if (a.rows != x.size()) throw DimError("matvec_transposed: dimension mismatch");
    Vector y(a.cols, 0.0);
    kernels::gemm_tn(a.data.data(), x.data(), y.data(), a.cols, a.rows, 1);
    return y;
}

Matrix orthonormal_basis(const Matrix& columns, double tol) {
    if (!all_finite(columns)) throw InvalidInput("orthonormal_basis: non-finite input");
    if (!(tol > 0.0)) throw InvalidInput("orthonormal_basis: tol must be positive");

    double max_col_norm = 0.0;
    for (std::size_t j = 0; j < columns.cols; ++j) {
        max_col_norm = std::max(max_col_norm, norm(columns.col(j)));
    }

    std::vector<Vector> basis;
    for (std::size_t j = 0; j < columns.cols; ++j) {
        Vector v = columns.col(j);
        // Two MGS passes keep the Gram matrix at working precision.
        for (int pass = 0; pass < 2; ++pass) {
            for (const Vector& b : basis) axpy(-dot(b, v), b, v);
        }
        const double r = norm(v);
        if (r > tol * max_col_norm && r > 0.0) {
            basis.push_back(scaled(v, 1.0 / r));
        }
    }

    Matrix out(columns.rows, basis.size());
    for (std::size_t j = 0; j < basis.size(); ++j) out.set_col(j, basis[j]);
    return out;
}

Vector project_onto(const Matrix& span_basis, const Vector& v) {
    if (span_basis.rows != v.size()) throw DimError("project_onto: dimension mismatch");
    if (span_basis.cols == 0) return Vector(v.size(), 0.0);
    Vector coeffs = matvec_transposed(span_basis, v);
    return matvec(span_basis, coeffs);
}

namespace {

// Deterministic orthonormal completion for zero singular directions:
// walk the standard basis and keep whatever survives projection.
void fill_orthonormal_complement(std::vector<Vector>& u_cols, std::size_t dim,
                                 std::size_t wanted) {
    for (std::size_t e = 0; e < dim && u_cols.size() < wanted; ++e) {
        Vector v(dim, 0.0);
        v[e] = 1.0;
        for (int pass = 0; pass < 2; ++pass) {
            for (const Vector& u : u_cols) axpy(-dot(u, v), u, v);
        }
        const double r = norm(v);
        if (r > 0.5) u_cols.push_back(scaled(v, 1.0 / r));
    }
}

SvdResult svd_tall(const Matrix& a) {
    const std::size_t m = a.rows;
    const std::size_t n = a.cols;

    std::vector<Vector> w(n);
    for (std::size_t j = 0; j < n; ++j) w[j] = a.col(j);
    std::vector<Vector> v(n);
    for (std::size_t j = 0; j < n; ++j) {
        v[j].assign(n, 0.0);
        v[j][j] = 1.0;
    }

    constexpr int kMaxSweeps = 60;
    constexpr double kOrthTol = 1e-12;  // relative column-orthogonality

    bool converged = false;
    for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
        converged = true;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                const double alpha = norm_sq(w[i]);
                const double beta = norm_sq(w[j]);
                const double gamma = dot(w[i], w[j]);
                if (alpha == 0.0 || beta == 0.0) continue;
                if (std::abs(gamma) <= kOrthTol * std::sqrt(alpha * beta)) continue;
                converged = false;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                kernels::rotate_pair(w[i].data(), w[j].data(), m, c, s);
                kernels::rotate_pair(v[i].data(), v[j].data(), n, c, s);
            }
        }
    }
    if (!converged) throw NumericalError("svd: Jacobi sweeps did not converge");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<double> sig(n);
    for (std::size_t j = 0; j < n; ++j) sig[j] = norm(w[j]);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return sig[x] > sig[y]; });

    SvdResult out;
    out.singular_values.resize(n);
    std::vector<Vector> u_cols;
    u_cols.reserve(n);
    std::vector<Vector> v_cols(n);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t j = order[k];
        out.singular_values[k] = sig[j];
        v_cols[k] = v[j];
        if (sig[j] > 0.0) u_cols.push_back(scaled(w[j], 1.0 / sig[j]));
    }
    fill_orthonormal_complement(u_cols, m, n);
    if (u_cols.size() < n) throw NumericalError("svd: failed to complete left basis");

    out.left_basis = Matrix::from_columns(u_cols);
    out.right_basis = Matrix::from_columns(v_cols);
    return out;
}

}  // namespace

SvdResult svd(const Matrix& a) {
    if (a.rows == 0 || a.cols == 0) throw InvalidInput("svd: empty matrix");
    if (!all_finite(a)) throw InvalidInput("svd: non-finite input");
    if (a.rows >= a.cols) return svd_tall(a);

    // Wide matrix: factor the transpose and swap the bases.
    Matrix at(a.cols, a.rows);
    for (std::size_t r = 0; r < a.rows; ++r)
        for (std::size_t c = 0; c < a.cols; ++c) at(c, r) = a(r, c);
    SvdResult t = svd_tall(at);
    SvdResult out;
    out.singular_values = std::move(t.singular_values);
    out.left_basis = std::move(t.right_basis);
    out.right_basis = std::move(t.left_basis);
    return out;
}

std::size_t numerical_rank(const Vector& singular_values, double rel_tol) {
    if (singular_values.empty() || singular_values.front() <= 0.0) return 0;
    const double cutoff = rel_tol * singular_values.front();
    std::size_t r = 0;
    for (double s : singular_values) {
        if (s > cutoff) ++r;
    }
    return r;
}

}  // namespace btm
