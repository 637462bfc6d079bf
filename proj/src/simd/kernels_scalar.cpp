#include "rbmlab/simd.hpp"

#include <cmath>

namespace rbmlab::simd {
namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void philox_round(std::uint32_t& x0, std::uint32_t& x1, std::uint32_t& x2,
                         std::uint32_t& x3, std::uint32_t k0, std::uint32_t k1) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * x0;
    const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * x2;
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    x0 = hi1 ^ x1 ^ k0;
    x1 = lo1;
    x2 = hi0 ^ x3 ^ k1;
    x3 = lo0;
}

void philox_fill_u64_scalar(std::uint64_t seed, std::uint64_t stream,
                            std::uint64_t block0, std::uint64_t* out,
                            std::size_t n_blocks) {
    const std::uint32_t key0 = static_cast<std::uint32_t>(seed);
    const std::uint32_t key1 = static_cast<std::uint32_t>(seed >> 32);
    const std::uint32_t s_lo = static_cast<std::uint32_t>(stream);
    const std::uint32_t s_hi = static_cast<std::uint32_t>(stream >> 32);
    for (std::size_t b = 0; b < n_blocks; ++b) {
        const std::uint64_t blk = block0 + b;
        std::uint32_t x0 = static_cast<std::uint32_t>(blk);
        std::uint32_t x1 = static_cast<std::uint32_t>(blk >> 32);
        std::uint32_t x2 = s_lo;
        std::uint32_t x3 = s_hi;
        std::uint32_t k0 = key0;
        std::uint32_t k1 = key1;
        for (int r = 0; r < 10; ++r) {
            if (r > 0) { k0 += kPhiloxW0; k1 += kPhiloxW1; }
            philox_round(x0, x1, x2, x3, k0, k1);
        }
        out[2 * b] = static_cast<std::uint64_t>(x0) | (static_cast<std::uint64_t>(x1) << 32);
        out[2 * b + 1] = static_cast<std::uint64_t>(x2) | (static_cast<std::uint64_t>(x3) << 32);
    }
}

std::size_t ensemble_step_scalar(double* xs, double* ys, double* zs, double* ls,
                                 std::size_t n, double dx, double dy, double dz,
                                 double rho, int torus_mode) {
    const double L = 2.0 * rho;
    std::size_t degenerate = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double x = xs[i] + dx;
        double y = ys[i] + dy;
        double z = zs[i] + dz;
        if (torus_mode) {
            x = x - L * std::floor((x + rho) / L);
            if (x >= rho) x = x - L;
            if (x < -rho) x = x + L;
            y = y - L * std::floor((y + rho) / L);
            if (y >= rho) y = y - L;
            if (y < -rho) y = y + L;
            z = z - L * std::floor((z + rho) / L);
            if (z >= rho) z = z - L;
            if (z < -rho) z = z + L;
        }
        const double r2 = (x * x + y * y) + z * z;
        if (r2 < 1.0) {
            if (r2 == 0.0) {
                ++degenerate;
            } else {
                const double r = std::sqrt(r2);
                x = x / r;
                y = y / r;
                z = z / r;
                ls[i] = ls[i] + (1.0 - r);
            }
        }
        xs[i] = x;
        ys[i] = y;
        zs[i] = z;
    }
    return degenerate;
}

} // namespace

const Kernels& scalar_kernels() {
    static const Kernels k{"scalar", &philox_fill_u64_scalar, &ensemble_step_scalar};
    return k;
}

} // namespace rbmlab::simd
