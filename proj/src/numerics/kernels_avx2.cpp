// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
#include <immintrin.h>

#include <cmath>

#include "kernels_impl.hpp"

namespace trrgen::num::kernels::avx2 {

namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d shuf = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

}  // namespace

void gemm_nn(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b, double* c) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        double* crow = c + i * n;
        std::size_t j = 0;
        // 16 output columns held in registers across the whole k loop.
        for (; j + 16 <= n; j += 16) {
            __m256d c0 = _mm256_loadu_pd(crow + j);
            __m256d c1 = _mm256_loadu_pd(crow + j + 4);
            __m256d c2 = _mm256_loadu_pd(crow + j + 8);
            __m256d c3 = _mm256_loadu_pd(crow + j + 12);
            for (std::size_t p = 0; p < k; ++p) {
                const __m256d av = _mm256_set1_pd(arow[p]);
                const double* brow = b + p * n + j;
                c0 = _mm256_fmadd_pd(av, _mm256_loadu_pd(brow), c0);
                c1 = _mm256_fmadd_pd(av, _mm256_loadu_pd(brow + 4), c1);
                c2 = _mm256_fmadd_pd(av, _mm256_loadu_pd(brow + 8), c2);
                c3 = _mm256_fmadd_pd(av, _mm256_loadu_pd(brow + 12), c3);
            }
            _mm256_storeu_pd(crow + j, c0);
            _mm256_storeu_pd(crow + j + 4, c1);
            _mm256_storeu_pd(crow + j + 8, c2);
            _mm256_storeu_pd(crow + j + 12, c3);
        }
        for (; j + 4 <= n; j += 4) {
            __m256d c0 = _mm256_loadu_pd(crow + j);
            for (std::size_t p = 0; p < k; ++p)
                c0 = _mm256_fmadd_pd(_mm256_set1_pd(arow[p]), _mm256_loadu_pd(b + p * n + j), c0);
            _mm256_storeu_pd(crow + j, c0);
        }
        for (; j < n; ++j) {
            double acc = crow[j];
            for (std::size_t p = 0; p < k; ++p) acc = std::fma(arow[p], b[p * n + j], acc);
            crow[j] = acc;
        }
    }
}

double dot(std::size_t n, const double* x, const double* y) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4) acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc = std::fma(x[i], y[i], acc);
    return acc;
}

void gemm_nt(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b, double* c) {
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) c[i * n + j] += dot(k, a + i * k, b + j * k);
}

void axpy(std::size_t n, double alpha, const double* x, double* y) {
    const __m256d av = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) y[i] = std::fma(alpha, x[i], y[i]);
}

void gemm_tn(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b, double* c) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* brow = b + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const double aip = a[i * k + p];
            if (aip != 0.0) axpy(n, aip, brow, c + p * n);
        }
    }
}

}  // namespace trrgen::num::kernels::avx2
