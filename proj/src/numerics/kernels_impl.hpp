#pragma once

#include <cstddef>

namespace trrgen::num::kernels {

namespace scalar {
void gemm_nn(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b, double* c);
void gemm_nt(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b, double* c);
void gemm_tn(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b, double* c);
double dot(std::size_t n, const double* x, const double* y);
void axpy(std::size_t n, double alpha, const double* x, double* y);
}  // namespace scalar

#if defined(TRRGEN_HAVE_AVX2)
namespace avx2 {
void gemm_nn(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b, double* c);
void gemm_nt(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b, double* c);
void gemm_tn(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b, double* c);
double dot(std::size_t n, const double* x, const double* y);
void axpy(std::size_t n, double alpha, const double* x, double* y);
}  // namespace avx2
#endif

}  // namespace trrgen::num::kernels
