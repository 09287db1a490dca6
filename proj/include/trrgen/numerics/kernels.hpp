#pragma once

#include <cstddef>
#include <string_view>

// Inner-loop arithmetic shared by the tensor ops. Every entry has a portable
// scalar reference and, when the CPU supports it, an AVX2/FMA variant picked
// once at startup. All matrices are dense row-major; every gemm accumulates
// into `c` (callers zero it first when they want a plain product).
//
// Per-element accumulation order depends only on the operands of that element,
// never on neighbouring rows, so a row of a product is bitwise reproducible no
// matter what the other rows hold.
namespace trrgen::num::kernels {

struct KernelTable {
    const char* name;
    // c[m x n] += a[m x k] * b[k x n]
    void (*gemm_nn)(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b, double* c);
    // c[m x n] += a[m x k] * b[n x k]^T
    void (*gemm_nt)(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b, double* c);
    // c[k x n] += a[m x k]^T * b[m x n]
    void (*gemm_tn)(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b, double* c);
    double (*dot)(std::size_t n, const double* x, const double* y);
    // y += alpha * x
    void (*axpy)(std::size_t n, double alpha, const double* x, double* y);
};

const KernelTable& scalar_kernels() noexcept;

// nullptr when the build or the CPU lacks AVX2+FMA.
const KernelTable* avx2_kernels() noexcept;

// The table used by the ops. Defaults to the best supported variant; the
// TRRGEN_KERNELS environment variable ("scalar" or "avx2") pins a choice.
const KernelTable& active() noexcept;

// Switch the active table by name. Returns false if unavailable.
bool select(std::string_view name) noexcept;

}  // namespace trrgen::num::kernels
