#include "rbmlab/simd.hpp"

#include <cstdlib>

namespace rbmlab::simd {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
    return __builtin_cpu_supports("avx2") != 0;
#else
    return false;
#endif
}

const Kernels& kernels() {
    static const Kernels& selected = [&]() -> const Kernels& {
        const char* force = std::getenv("RBM_LAB_FORCE_SCALAR");
        if (force && force[0] == '1') return scalar_kernels();
#ifdef RBMLAB_HAVE_AVX2_TU
        if (cpu_has_avx2()) return avx2_kernels();
#endif
        return scalar_kernels();
    }();
    return selected;
}

} // namespace rbmlab::simd
