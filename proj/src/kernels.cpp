#include "btm/kernels.hpp"

#include <cstdint>

namespace btm::kernels {

namespace {
// Parallel regions only pay off above this many multiply-adds.
constexpr std::size_t kMinParallelWork = 1u << 15;
}  // namespace

void gemm_nn(const double* a, const double* b, double* c,
             std::size_t m, std::size_t k, std::size_t n) {
    const std::int64_t rows = static_cast<std::int64_t>(m);
#pragma omp parallel for schedule(static) if (m * k * n > kMinParallelWork)
    for (std::int64_t i = 0; i < rows; ++i) {
        const double* ai = a + i * k;
        double* ci = c + i * n;
        for (std::size_t j = 0; j < n; ++j) ci[j] = 0.0;
        for (std::size_t l = 0; l < k; ++l) {
            const double ail = ai[l];
            const double* bl = b + l * n;
            for (std::size_t j = 0; j < n; ++j) ci[j] += ail * bl[j];
        }
    }
}

void gemm_nt(const double* a, const double* b, double* c,
             std::size_t m, std::size_t k, std::size_t n) {
    const std::int64_t rows = static_cast<std::int64_t>(m);
#pragma omp parallel for schedule(static) if (m * k * n > kMinParallelWork)
    for (std::int64_t i = 0; i < rows; ++i) {
        const double* ai = a + i * k;
        double* ci = c + i * n;
        for (std::size_t j = 0; j < n; ++j) {
            const double* bj = b + j * k;
            double acc = 0.0;
            for (std::size_t l = 0; l < k; ++l) acc += ai[l] * bj[l];
            ci[j] = acc;
        }
    }
}

void gemm_tn(const double* a, const double* b, double* c,
             std::size_t m, std::size_t k, std::size_t n) {
    const std::int64_t rows = static_cast<std::int64_t>(m);
#pragma omp parallel for schedule(static) if (m * k * n > kMinParallelWork)
    for (std::int64_t i = 0; i < rows; ++i) {
        double* ci = c + i * n;
        for (std::size_t j = 0; j < n; ++j) ci[j] = 0.0;
        for (std::size_t l = 0; l < k; ++l) {
            const double ali = a[l * m + i];
            const double* bl = b + l * n;
            for (std::size_t j = 0; j < n; ++j) ci[j] += ali * bl[j];
        }
    }
}

void rotate_pair(double* x, double* y, std::size_t n, double cos_v, double sin_v) {
    const std::int64_t len = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static) if (n > kMinParallelWork)
    for (std::int64_t i = 0; i < len; ++i) {
        const double xi = x[i];
        const double yi = y[i];
        x[i] = cos_v * xi - sin_v * yi;
        y[i] = sin_v * xi + cos_v * yi;
    }
}

namespace ref {

void gemm_nn(const double* a, const double* b, double* c,
             std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* ai = a + i * k;
        double* ci = c + i * n;
        for (std::size_t j = 0; j < n; ++j) ci[j] = 0.0;
        for (std::size_t l = 0; l < k; ++l) {
            const double ail = ai[l];
            const double* bl = b + l * n;
            for (std::size_t j = 0; j < n; ++j) ci[j] += ail * bl[j];
        }
    }
}

void gemm_nt(const double* a, const double* b, double* c,
             std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* ai = a + i * k;
        double* ci = c + i * n;
        for (std::size_t j = 0; j < n; ++j) {
            const double* bj = b + j * k;
            double acc = 0.0;
            for (std::size_t l = 0; l < k; ++l) acc += ai[l] * bj[l];
            ci[j] = acc;
        }
    }
}

void gemm_tn(const double* a, const double* b, double* c,
             std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        double* ci = c + i * n;
        for (std::size_t j = 0; j < n; ++j) ci[j] = 0.0;
        for (std::size_t l = 0; l < k; ++l) {
            const double ali = a[l * m + i];
            const double* bl = b + l * n;
            for (std::size_t j = 0; j < n; ++j) ci[j] += ali * bl[j];
        }
    }
}

void rotate_pair(double* x, double* y, std::size_t n, double cos_v, double sin_v) {
    for (std::size_t i = 0; i < n; ++i) {
        const double xi = x[i];
        const double yi = y[i];
        x[i] = cos_v * xi - sin_v * yi;
        y[i] = sin_v * xi + cos_v * yi;
    }
}

}  // namespace ref

}  // namespace btm::kernels
