#pragma once

#include "rbmlab/geometry.hpp"
#include "rbmlab/simd.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace rbmlab {

/// Identity of one driving-noise realization.  Identical (seed, stream_id, dt)
/// reproduce the increment sequence bit-for-bit; distinct stream_ids index
/// disjoint Philox counter spaces and are statistically independent.
struct NoiseStream {
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;
    double dt = 1e-4;
};

/// Buffered counter-mode uniforms for one (seed, stream_id).
class UniformSource {
public:
    explicit UniformSource(std::uint64_t seed, std::uint64_t stream_id)
        : seed_(seed), stream_(stream_id) {
        buf_.resize(2 * kBlocksPerFill);
    }

    /// Rebind to another stream, reusing the buffer.
    void reset(std::uint64_t seed, std::uint64_t stream_id) {
        seed_ = seed;
        stream_ = stream_id;
        next_block_ = 0;
        pos_ = buf_.size();
    }

    std::uint64_t next_u64() {
        if (pos_ == buf_.size()) refill();
        return buf_[pos_++];
    }

    /// Uniform on [0,1), 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform on (0,1]; safe as a log argument.
    double next_double_oc() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_; }

private:
    static constexpr std::size_t kBlocksPerFill = 512;

    void refill() {
        simd::kernels().philox_fill_u64(seed_, stream_, next_block_, buf_.data(),
                                        kBlocksPerFill);
        next_block_ += kBlocksPerFill;
        pos_ = 0;
    }

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t next_block_ = 0;
    std::size_t pos_ = 2 * kBlocksPerFill; // forces refill on first draw
    std::vector<std::uint64_t> buf_;
};

namespace detail {

/// 256-layer ziggurat tables for the standard normal.
struct ZigguratTables {
    static constexpr int kBoxes = 256;
    static constexpr double kR = 3.6541528853610088;
    static constexpr double kV = 4.92867323399e-3;
    std::array<double, kBoxes + 1> x;     // layer abscissae, x[0] > x[1]=R > ...
    std::array<double, kBoxes + 1> y;     // exp(-x^2/2) at those abscissae
    std::array<double, kBoxes> ratio;     // x[i+1]/x[i]
    ZigguratTables();
};

const ZigguratTables& ziggurat();

} // namespace detail

/// Standard-normal draws via ziggurat rejection over a UniformSource.
class NormalSource {
public:
    explicit NormalSource(const NoiseStream& ns)
        : uni_(ns.seed, ns.stream_id), dt_(ns.dt) {}
    NormalSource(std::uint64_t seed, std::uint64_t stream_id)
        : uni_(seed, stream_id), dt_(0.0) {}

    void reset(std::uint64_t seed, std::uint64_t stream_id) { uni_.reset(seed, stream_id); }

    double next() {
        const auto& t = detail::ziggurat();
        for (;;) {
            const std::uint64_t w = uni_.next_u64();
            const int i = static_cast<int>(w & 0xFF);
            const double f = static_cast<double>(w >> 11) * 0x1.0p-53;
            const double sign = (w & 0x100) ? -1.0 : 1.0;
            if (f < t.ratio[i]) return sign * (f * t.x[i]);
            if (i == 0) return sign * tail();
            const double xv = f * t.x[i];
            const double yv = t.y[i] + uni_.next_double() * (t.y[i + 1] - t.y[i]);
            if (yv < std::exp(-0.5 * xv * xv)) return sign * xv;
        }
    }

    Vec3 next_vec3() {
        const double a = next();
        const double b = next();
        const double c = next();
        return {a, b, c};
    }

    UniformSource& uniforms() { return uni_; }
    double dt() const { return dt_; }

private:
    double tail() {
        const auto& t = detail::ziggurat();
        double xv, yv;
        do {
            xv = -std::log(uni_.next_double_oc()) / t.kR;
            yv = -std::log(uni_.next_double_oc());
        } while (yv + yv < xv * xv);
        return t.kR + xv;
    }

    UniformSource uni_;
    double dt_;
};

/// Stream-id derivation for replica fan-out: replica r of a run with master
/// seed s gets stream_id = base + r.  The constant offsets keep estimator
/// streams, pair streams and auxiliary draws in disjoint id ranges.
inline constexpr std::uint64_t kStreamBaseRuns = 0x100000000ull;
inline constexpr std::uint64_t kStreamBaseAux = 0x200000000ull;

} // namespace rbmlab
