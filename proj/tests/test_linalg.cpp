#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "btm/linalg.hpp"
#include "btm/rng.hpp"
#include "oracles.hpp"

using namespace btm;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
    Matrix m(rows, cols);
    for (double& v : m.data) v = rng.normal();
    return m;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i)
        m = std::max(m, std::abs(a.data[i] - b.data[i]));
    return m;
}

Matrix reconstruct(const SvdResult& s) {
    Matrix scaled_u = s.left_basis;
    for (std::size_t i = 0; i < scaled_u.rows; ++i)
        for (std::size_t j = 0; j < scaled_u.cols; ++j)
            scaled_u(i, j) *= s.singular_values[j];
    return matmul_transposed_b(scaled_u, s.right_basis);
}

}  // namespace

TEST_CASE("orthonormal_basis drops collinear columns") {
    Matrix cols(2, 2);
    cols(0, 0) = 1.0; cols(1, 0) = 0.0;
    cols(0, 1) = 2.0; cols(1, 1) = 0.0;
    Matrix basis = orthonormal_basis(cols, 1e-10);
    REQUIRE(basis.cols == 1);
    CHECK(basis(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(basis(1, 0) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("orthonormal_basis of identity is identity") {
    Matrix basis = orthonormal_basis(Matrix::identity(3), 1e-10);
    REQUIRE(basis.cols == 3);
    CHECK(max_abs_diff(basis, Matrix::identity(3)) == 0.0);
}

TEST_CASE("orthonormal_basis of random full-rank columns has identity Gram matrix") {
    Rng rng(7);
    Matrix cols = random_matrix(10, 5, rng);
    Matrix basis = orthonormal_basis(cols, 1e-10);
    REQUIRE(basis.cols == 5);
    Matrix gram = matmul_transposed_a(basis, basis);
    CHECK(max_abs_diff(gram, Matrix::identity(5)) < 1e-10);
}

TEST_CASE("orthonormal_basis rejects bad input") {
    Matrix cols(2, 1);
    cols(0, 0) = std::nan("");
    CHECK_THROWS_AS(orthonormal_basis(cols, 1e-10), InvalidInput);
    CHECK_THROWS_AS(orthonormal_basis(Matrix::identity(2), 0.0), InvalidInput);
}

TEST_CASE("orthonormal_basis of all-zero columns is empty") {
    Matrix basis = orthonormal_basis(Matrix(4, 3, 0.0), 1e-10);
    CHECK(basis.rows == 4);
    CHECK(basis.cols == 0);
}

TEST_CASE("project_onto axis basis") {
    Matrix basis(2, 1);
    basis(0, 0) = 1.0;
    Vector p = project_onto(basis, Vector{3.0, 4.0});
    CHECK(p[0] == 3.0);
    CHECK(p[1] == 0.0);
}

TEST_CASE("project_onto is idempotent and leaves in-span vectors fixed") {
    Rng rng(11);
    Matrix basis = orthonormal_basis(random_matrix(8, 3, rng), 1e-10);
    Vector v(8);
    for (double& x : v) x = rng.normal();

    Vector pv = project_onto(basis, v);
    Vector ppv = project_onto(basis, pv);
    CHECK(norm(sub(ppv, pv)) < 1e-12);

    // A vector already in the span projects to itself.
    Vector in_span = matvec(basis, Vector{0.3, -1.2, 2.0});
    Vector proj = project_onto(basis, in_span);
    CHECK(norm(sub(proj, in_span)) < 1e-12);
}

TEST_CASE("projection satisfies the Pythagorean identity and residual orthogonality") {
    Rng rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        Matrix basis = orthonormal_basis(random_matrix(8, 3, rng), 1e-10);
        Vector v(8);
        for (double& x : v) x = rng.normal();
        Vector pv = project_onto(basis, v);
        Vector res = sub(v, pv);
        CHECK(std::abs(norm_sq(res) + norm_sq(pv) - norm_sq(v)) < 1e-10);
        CHECK(std::abs(dot(res, pv)) < 1e-10);
    }
}

TEST_CASE("project_onto dimension mismatch") {
    CHECK_THROWS_AS(project_onto(Matrix::identity(3), Vector{1.0, 2.0}), DimError);
}

TEST_CASE("project_onto empty basis returns zero") {
    Matrix basis(5, 0);
    Vector p = project_onto(basis, Vector(5, 2.0));
    CHECK(norm(p) == 0.0);
}

TEST_CASE("svd of diag(2,1)") {
    Matrix a(2, 2);
    a(0, 0) = 2.0;
    a(1, 1) = 1.0;
    SvdResult s = svd(a);
    CHECK(s.singular_values[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(s.singular_values[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("svd of a rank-1 outer product") {
    Rng rng(17);
    Vector u(6), v(4);
    for (double& x : u) x = rng.normal();
    for (double& x : v) x = rng.normal();
    Matrix a(6, 4);
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 4; ++j) a(i, j) = u[i] * v[j];
    SvdResult s = svd(a);
    CHECK(s.singular_values[1] / s.singular_values[0] <= 1e-10);
}

TEST_CASE("svd singular values match the eigen-oracle on A^T A") {
    Rng rng(19);
    Matrix a = random_matrix(6, 4, rng);
    SvdResult s = svd(a);
    std::vector<double> eig = oracles::symmetric_eigenvalues(matmul_transposed_a(a, a));
    for (std::size_t j = 0; j < 4; ++j) {
        const double expected = std::sqrt(std::max(eig[j], 0.0));
        CHECK(std::abs(s.singular_values[j] - expected) <= 1e-8 * (1.0 + expected));
    }
}

TEST_CASE("svd bases are orthonormal and reconstruct the input") {
    Rng rng(23);
    for (auto [rows, cols] : {std::pair<std::size_t, std::size_t>{7, 5}, {5, 7}, {6, 6}}) {
        Matrix a = random_matrix(rows, cols, rng);
        SvdResult s = svd(a);
        const std::size_t k = std::min(rows, cols);
        REQUIRE(s.left_basis.cols == k);
        REQUIRE(s.right_basis.cols == k);
        CHECK(max_abs_diff(matmul_transposed_a(s.left_basis, s.left_basis),
                           Matrix::identity(k)) < 1e-10);
        CHECK(max_abs_diff(matmul_transposed_a(s.right_basis, s.right_basis),
                           Matrix::identity(k)) < 1e-10);
        CHECK(std::is_sorted(s.singular_values.rbegin(), s.singular_values.rend()));

        Matrix rec = reconstruct(s);
        double err = 0.0;
        for (std::size_t i = 0; i < a.data.size(); ++i) {
            const double d = a.data[i] - rec.data[i];
            err += d * d;
        }
        CHECK(std::sqrt(err) <= 1e-8 * frobenius_norm(a));
    }
}

TEST_CASE("svd tail identity") {
    Rng rng(29);
    Matrix a = random_matrix(9, 6, rng);
    SvdResult s = svd(a);
    for (std::size_t r = 0; r <= 6; ++r) {
        Matrix scaled_u = s.left_basis;
        for (std::size_t i = 0; i < scaled_u.rows; ++i)
            for (std::size_t j = 0; j < scaled_u.cols; ++j)
                scaled_u(i, j) *= j < r ? s.singular_values[j] : 0.0;
        Matrix ar = matmul_transposed_b(scaled_u, s.right_basis);
        double err_sq = 0.0;
        for (std::size_t i = 0; i < a.data.size(); ++i) {
            const double d = a.data[i] - ar.data[i];
            err_sq += d * d;
        }
        double tail = 0.0;
        for (std::size_t j = r; j < 6; ++j) tail += s.singular_values[j] * s.singular_values[j];
        CHECK(std::abs(err_sq - tail) <= 1e-8 * (1.0 + tail));
    }
}

TEST_CASE("svd is deterministic") {
    Rng rng(31);
    Matrix a = random_matrix(12, 5, rng);
    SvdResult s1 = svd(a);
    SvdResult s2 = svd(a);
    CHECK(s1.singular_values == s2.singular_values);
    CHECK(s1.left_basis.data == s2.left_basis.data);
    CHECK(s1.right_basis.data == s2.right_basis.data);
}

TEST_CASE("svd of the zero matrix") {
    SvdResult s = svd(Matrix(4, 3, 0.0));
    for (double sv : s.singular_values) CHECK(sv == 0.0);
    CHECK(max_abs_diff(matmul_transposed_a(s.left_basis, s.left_basis), Matrix::identity(3)) <
          1e-12);
}

TEST_CASE("svd input validation") {
    Matrix bad(2, 2);
    bad(0, 0) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(svd(bad), InvalidInput);
    CHECK_THROWS_AS(svd(Matrix()), InvalidInput);
}

TEST_CASE("numerical_rank threshold") {
    CHECK(numerical_rank({2.0, 1.0, 1e-9}) == 2);
    CHECK(numerical_rank({2.0, 1.0, 1e-7}) == 3);
    CHECK(numerical_rank({0.0, 0.0}) == 0);
    CHECK(numerical_rank({}) == 0);
}

TEST_CASE("matmul kernels agree with naive loops") {
    Rng rng(37);
    Matrix a = random_matrix(5, 7, rng);
    Matrix b = random_matrix(7, 4, rng);
    Matrix c = matmul(a, b);
    for (std::size_t i = 0; i < 5; ++i) {
        for (std::size_t j = 0; j < 4; ++j) {
            double acc = 0.0;
            for (std::size_t l = 0; l < 7; ++l) acc += a(i, l) * b(l, j);
            CHECK(c(i, j) == doctest::Approx(acc).epsilon(1e-13));
        }
    }
}
