#pragma once

#include <cstddef>
#include <cstdint>

namespace rbmlab::simd {

/// Data-parallel inner-loop kernels.  Every variant of a kernel is bit-exact
/// against the scalar reference: identical operation order, no FMA
/// contraction, only correctly-rounded primitives (add/sub/mul/div/sqrt/floor).
/// Selecting a different variant at runtime therefore never changes results.
struct Kernels {
    const char* name;

    /// Philox4x32-10 counter-mode blocks for (seed, stream).  Block b fills
    /// out[2b] and out[2b+1].  Pure integer arithmetic.
    void (*philox_fill_u64)(std::uint64_t seed, std::uint64_t stream,
                            std::uint64_t block0, std::uint64_t* out,
                            std::size_t n_blocks);

    /// One projection-scheme step applied to a whole particle ensemble
    /// sharing the increment (dx,dy,dz).  SoA layout.  When torus_mode is
    /// nonzero, positions are wrapped into [-rho, rho) first.  Particles
    /// landing inside the unit ball are projected onto it and 1-r is added to
    /// their local time.  Returns the number of degenerate landings (r == 0).
    std::size_t (*ensemble_step)(double* xs, double* ys, double* zs, double* ls,
                                 std::size_t n, double dx, double dy, double dz,
                                 double rho, int torus_mode);
};

const Kernels& scalar_kernels();
const Kernels& avx2_kernels(); // callable only if cpu_has_avx2()

bool cpu_has_avx2();

/// Best available variant; honours RBM_LAB_FORCE_SCALAR=1.
const Kernels& kernels();

} // namespace rbmlab::simd
