#include "trrgen/numerics/kernels.hpp"

#include <cstdlib>
#include <string_view>

#include "kernels_impl.hpp"

namespace trrgen::num::kernels {

namespace {

constexpr KernelTable kScalar{"scalar", scalar::gemm_nn, scalar::gemm_nt, scalar::gemm_tn, scalar::dot, scalar::axpy};

#if defined(TRRGEN_HAVE_AVX2)
constexpr KernelTable kAvx2{"avx2", avx2::gemm_nn, avx2::gemm_nt, avx2::gemm_tn, avx2::dot, avx2::axpy};

bool cpu_has_avx2() noexcept {
#if defined(__GNUC__) || defined(__clang__)
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}
#endif

const KernelTable* initial_table() noexcept {
    const KernelTable* best = &kScalar;
    if (const KernelTable* v = avx2_kernels()) best = v;
    if (const char* env = std::getenv("TRRGEN_KERNELS")) {
        const std::string_view want(env);
        if (want == "scalar") return &kScalar;
        if (want == "avx2" && avx2_kernels()) return avx2_kernels();
    }
    return best;
}

const KernelTable*& current() noexcept {
    static const KernelTable* table = initial_table();
    return table;
}

}  // namespace

const KernelTable& scalar_kernels() noexcept { return kScalar; }

const KernelTable* avx2_kernels() noexcept {
#if defined(TRRGEN_HAVE_AVX2)
    static const bool supported = cpu_has_avx2();
    return supported ? &kAvx2 : nullptr;
#else
    return nullptr;
#endif
}

const KernelTable& active() noexcept { return *current(); }

bool select(std::string_view name) noexcept {
    if (name == "scalar") {
        current() = &kScalar;
        return true;
    }
    if (name == "avx2" && avx2_kernels()) {
        current() = avx2_kernels();
        return true;
    }
    return false;
}

}  // namespace trrgen::num::kernels
