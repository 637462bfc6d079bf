// AVX2 variants. Compiled with -mavx2 only (no -mfma): every floating-point
// operation here is a correctly-rounded IEEE primitive executed in the same
// order as the scalar reference, so results are bit-identical per particle.

#include "rbmlab/simd.hpp"

#include <cstring>
#include <immintrin.h>

namespace rbmlab::simd {
namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

// hi/lo 32-bit halves of per-lane 32x32 products, for 8 u32 lanes
inline void mulhilo8(__m256i x, __m256i m, __m256i& hi, __m256i& lo) {
    const __m256i pe = _mm256_mul_epu32(x, m);
    const __m256i po = _mm256_mul_epu32(_mm256_srli_epi64(x, 32), m);
    hi = _mm256_blend_epi32(_mm256_srli_epi64(pe, 32), po, 0b10101010);
    lo = _mm256_blend_epi32(pe, _mm256_slli_epi64(po, 32), 0b10101010);
}

void philox_fill_u64_avx2(std::uint64_t seed, std::uint64_t stream,
                          std::uint64_t block0, std::uint64_t* out,
                          std::size_t n_blocks) {
    const __m256i m0 = _mm256_set1_epi64x(static_cast<long long>(kPhiloxM0));
    const __m256i m1 = _mm256_set1_epi64x(static_cast<long long>(kPhiloxM1));
    const std::uint32_t key0 = static_cast<std::uint32_t>(seed);
    const std::uint32_t key1 = static_cast<std::uint32_t>(seed >> 32);
    const std::uint32_t s_lo = static_cast<std::uint32_t>(stream);
    const std::uint32_t s_hi = static_cast<std::uint32_t>(stream >> 32);

    std::size_t b = 0;
    alignas(32) std::uint32_t lane[4][8];
    for (; b + 8 <= n_blocks; b += 8) {
        for (int j = 0; j < 8; ++j) {
            const std::uint64_t blk = block0 + b + j;
            lane[0][j] = static_cast<std::uint32_t>(blk);
            lane[1][j] = static_cast<std::uint32_t>(blk >> 32);
        }
        __m256i x0 = _mm256_load_si256(reinterpret_cast<const __m256i*>(lane[0]));
        __m256i x1 = _mm256_load_si256(reinterpret_cast<const __m256i*>(lane[1]));
        __m256i x2 = _mm256_set1_epi32(static_cast<int>(s_lo));
        __m256i x3 = _mm256_set1_epi32(static_cast<int>(s_hi));
        std::uint32_t k0 = key0, k1 = key1;
        for (int r = 0; r < 10; ++r) {
            if (r > 0) { k0 += kPhiloxW0; k1 += kPhiloxW1; }
            const __m256i k0v = _mm256_set1_epi32(static_cast<int>(k0));
            const __m256i k1v = _mm256_set1_epi32(static_cast<int>(k1));
            __m256i hi0, lo0, hi1, lo1;
            mulhilo8(x0, m0, hi0, lo0);
            mulhilo8(x2, m1, hi1, lo1);
            x0 = _mm256_xor_si256(_mm256_xor_si256(hi1, x1), k0v);
            x1 = lo1;
            x2 = _mm256_xor_si256(_mm256_xor_si256(hi0, x3), k1v);
            x3 = lo0;
        }
        _mm256_store_si256(reinterpret_cast<__m256i*>(lane[0]), x0);
        _mm256_store_si256(reinterpret_cast<__m256i*>(lane[1]), x1);
        _mm256_store_si256(reinterpret_cast<__m256i*>(lane[2]), x2);
        _mm256_store_si256(reinterpret_cast<__m256i*>(lane[3]), x3);
        for (int j = 0; j < 8; ++j) {
            out[2 * (b + j)] = static_cast<std::uint64_t>(lane[0][j]) |
                               (static_cast<std::uint64_t>(lane[1][j]) << 32);
            out[2 * (b + j) + 1] = static_cast<std::uint64_t>(lane[2][j]) |
                                   (static_cast<std::uint64_t>(lane[3][j]) << 32);
        }
    }
    if (b < n_blocks)
        scalar_kernels().philox_fill_u64(seed, stream, block0 + b, out + 2 * b,
                                         n_blocks - b);
}

inline __m256d wrap4(__m256d c, __m256d rho, __m256d neg_rho, __m256d L) {
    __m256d t = _mm256_floor_pd(_mm256_div_pd(_mm256_add_pd(c, rho), L));
    __m256d w = _mm256_sub_pd(c, _mm256_mul_pd(L, t));
    const __m256d ge = _mm256_cmp_pd(w, rho, _CMP_GE_OQ);
    w = _mm256_blendv_pd(w, _mm256_sub_pd(w, L), ge);
    const __m256d lt = _mm256_cmp_pd(w, neg_rho, _CMP_LT_OQ);
    w = _mm256_blendv_pd(w, _mm256_add_pd(w, L), lt);
    return w;
}

std::size_t ensemble_step_avx2(double* xs, double* ys, double* zs, double* ls,
                               std::size_t n, double dx, double dy, double dz,
                               double rho, int torus_mode) {
    const __m256d dxv = _mm256_set1_pd(dx);
    const __m256d dyv = _mm256_set1_pd(dy);
    const __m256d dzv = _mm256_set1_pd(dz);
    const __m256d rhov = _mm256_set1_pd(rho);
    const __m256d nrhov = _mm256_set1_pd(-rho);
    const __m256d Lv = _mm256_set1_pd(2.0 * rho);
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d zero = _mm256_setzero_pd();

    std::size_t degenerate = 0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d x = _mm256_add_pd(_mm256_loadu_pd(xs + i), dxv);
        __m256d y = _mm256_add_pd(_mm256_loadu_pd(ys + i), dyv);
        __m256d z = _mm256_add_pd(_mm256_loadu_pd(zs + i), dzv);
        if (torus_mode) {
            x = wrap4(x, rhov, nrhov, Lv);
            y = wrap4(y, rhov, nrhov, Lv);
            z = wrap4(z, rhov, nrhov, Lv);
        }
        const __m256d r2 = _mm256_add_pd(
            _mm256_add_pd(_mm256_mul_pd(x, x), _mm256_mul_pd(y, y)),
            _mm256_mul_pd(z, z));
        const __m256d in = _mm256_cmp_pd(r2, one, _CMP_LT_OQ);
        if (_mm256_movemask_pd(in)) {
            const __m256d deg = _mm256_and_pd(in, _mm256_cmp_pd(r2, zero, _CMP_EQ_OQ));
            degenerate += static_cast<std::size_t>(
                __builtin_popcount(static_cast<unsigned>(_mm256_movemask_pd(deg))));
            const __m256d proj = _mm256_andnot_pd(deg, in);
            const __m256d r = _mm256_sqrt_pd(r2);
            x = _mm256_blendv_pd(x, _mm256_div_pd(x, r), proj);
            y = _mm256_blendv_pd(y, _mm256_div_pd(y, r), proj);
            z = _mm256_blendv_pd(z, _mm256_div_pd(z, r), proj);
            const __m256d l = _mm256_loadu_pd(ls + i);
            const __m256d lnew = _mm256_add_pd(l, _mm256_sub_pd(one, r));
            _mm256_storeu_pd(ls + i, _mm256_blendv_pd(l, lnew, proj));
        }
        _mm256_storeu_pd(xs + i, x);
        _mm256_storeu_pd(ys + i, y);
        _mm256_storeu_pd(zs + i, z);
    }
    if (i < n)
        degenerate += scalar_kernels().ensemble_step(xs + i, ys + i, zs + i, ls + i,
                                                     n - i, dx, dy, dz, rho, torus_mode);
    return degenerate;
}

} // namespace

const Kernels& avx2_kernels() {
    static const Kernels k{"avx2", &philox_fill_u64_avx2, &ensemble_step_avx2};
    return k;
}

} // namespace rbmlab::simd
