#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <vector>

#include "btm/kernels.hpp"
#include "btm/rng.hpp"

using namespace btm;

namespace {

std::vector<double> random_buf(std::size_t n, Rng& rng) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.normal();
    return v;
}

}  // namespace

// The parallel kernels assign each output element to exactly one iteration,
// so they must match the serial reference bit-for-bit at any size,
// including sizes above the parallel-dispatch threshold.
TEST_CASE("gemm variants match the serial reference bit-for-bit") {
    Rng rng(3);
    for (auto [m, k, n] : {std::tuple<std::size_t, std::size_t, std::size_t>{3, 4, 5},
                           {64, 80, 96},
                           {1, 7, 1},
                           {128, 256, 64}}) {
        std::vector<double> a = random_buf(m * k, rng);
        std::vector<double> b_nn = random_buf(k * n, rng);
        std::vector<double> c_par(m * n), c_ref(m * n);

        kernels::gemm_nn(a.data(), b_nn.data(), c_par.data(), m, k, n);
        kernels::ref::gemm_nn(a.data(), b_nn.data(), c_ref.data(), m, k, n);
        CHECK(c_par == c_ref);

        std::vector<double> b_nt = random_buf(n * k, rng);
        kernels::gemm_nt(a.data(), b_nt.data(), c_par.data(), m, k, n);
        kernels::ref::gemm_nt(a.data(), b_nt.data(), c_ref.data(), m, k, n);
        CHECK(c_par == c_ref);

        std::vector<double> a_tn = random_buf(k * m, rng);
        kernels::gemm_tn(a_tn.data(), b_nn.data(), c_par.data(), m, k, n);
        kernels::ref::gemm_tn(a_tn.data(), b_nn.data(), c_ref.data(), m, k, n);
        CHECK(c_par == c_ref);
    }
}

TEST_CASE("rotate_pair matches the serial reference bit-for-bit") {
    Rng rng(5);
    for (std::size_t n : {std::size_t{16}, std::size_t{5000}, std::size_t{70000}}) {
        std::vector<double> x = random_buf(n, rng);
        std::vector<double> y = random_buf(n, rng);
        std::vector<double> xr = x, yr = y;
        kernels::rotate_pair(x.data(), y.data(), n, 0.8, 0.6);
        kernels::ref::rotate_pair(xr.data(), yr.data(), n, 0.8, 0.6);
        CHECK(x == xr);
        CHECK(y == yr);
    }
}

TEST_CASE("rotation preserves the pairwise norm") {
    Rng rng(7);
    std::vector<double> x = random_buf(100, rng);
    std::vector<double> y = random_buf(100, rng);
    double before = 0.0;
    for (std::size_t i = 0; i < 100; ++i) before += x[i] * x[i] + y[i] * y[i];
    const double c = std::cos(0.3), s = std::sin(0.3);
    kernels::rotate_pair(x.data(), y.data(), 100, c, s);
    double after = 0.0;
    for (std::size_t i = 0; i < 100; ++i) after += x[i] * x[i] + y[i] * y[i];
    CHECK(after == doctest::Approx(before).epsilon(1e-13));
}
