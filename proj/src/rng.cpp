#include "rbmlab/rng.hpp"

#include <cmath>

namespace rbmlab::detail {

ZigguratTables::ZigguratTables() {
    const double f = std::exp(-0.5 * kR * kR);
    x[0] = kV / f; // pseudo-layer whose overhang carries the tail mass
    x[1] = kR;
    x[kBoxes] = 0.0;
    for (int i = 2; i < kBoxes; ++i) {
        const double xi = x[i - 1];
        x[i] = std::sqrt(-2.0 * std::log(kV / xi + std::exp(-0.5 * xi * xi)));
    }
    for (int i = 0; i <= kBoxes; ++i) y[i] = std::exp(-0.5 * x[i] * x[i]);
    for (int i = 0; i < kBoxes; ++i) ratio[i] = x[i + 1] / x[i];
}

const ZigguratTables& ziggurat() {
    static const ZigguratTables t;
    return t;
}

} // namespace rbmlab::detail
