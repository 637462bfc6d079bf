#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace rbmlab {

/// Running mean/variance accumulator.  Merging is plain sum-merging, so a
/// fixed merge order gives bit-identical reductions at any thread count.
struct MeanAccumulator {
    std::size_t n = 0;
    double sum = 0.0;
    double sum_sq = 0.0;

    void add(double x) {
        ++n;
        sum += x;
        sum_sq += x * x;
    }
    void merge(const MeanAccumulator& o) {
        n += o.n;
        sum += o.sum;
        sum_sq += o.sum_sq;
    }
    double mean() const { return n ? sum / static_cast<double>(n) : 0.0; }
    double variance() const {
        if (n < 2) return 0.0;
        const double m = mean();
        const double v = (sum_sq - static_cast<double>(n) * m * m) / static_cast<double>(n - 1);
        return v > 0.0 ? v : 0.0;
    }
    double stderr_of_mean() const {
        return n ? std::sqrt(variance() / static_cast<double>(n)) : 0.0;
    }
};

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// One-sample Kolmogorov-Smirnov statistic against an analytic CDF.
/// Sorts a copy of the sample.
inline double ks_statistic(std::vector<double> sample,
                           const std::function<double(double)>& cdf) {
    if (sample.empty()) throw std::invalid_argument("ks_statistic: empty sample");
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d = std::max(d, std::max(f - static_cast<double>(i) / n,
                                 static_cast<double>(i + 1) / n - f));
    }
    return d;
}

/// Asymptotic critical value c(alpha)/sqrt(n); c(0.01) = 1.628.
inline double ks_critical(std::size_t n, double c_alpha = 1.628) {
    return c_alpha / std::sqrt(static_cast<double>(n));
}

/// Pearson chi-square statistic for observed counts vs expected counts.
/// Cells with expected <= 0 must carry no observations.
inline double chi_square_statistic(const std::vector<double>& observed,
                                   const std::vector<double>& expected) {
    if (observed.size() != expected.size())
        throw std::invalid_argument("chi_square_statistic: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        if (expected[i] <= 0.0) {
            if (observed[i] != 0.0)
                throw std::invalid_argument("chi_square_statistic: mass in zero-volume cell");
            continue;
        }
        const double d = observed[i] - expected[i];
        s += d * d / expected[i];
    }
    return s;
}

/// Spearman rank correlation (average ranks for ties).
inline double spearman_rho(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2)
        throw std::invalid_argument("spearman_rho: need two equal-length series");
    auto ranks = [](const std::vector<double>& v) {
        const std::size_t n = v.size();
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
        std::vector<double> r(n);
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
            const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
            for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
            i = j + 1;
        }
        return r;
    };
    const auto ra = ranks(a);
    const auto rb = ranks(b);
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < ra.size(); ++i) { ma += ra[i]; mb += rb[i]; }
    ma /= static_cast<double>(ra.size());
    mb /= static_cast<double>(rb.size());
    double num = 0, va = 0, vb = 0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        num += (ra[i] - ma) * (rb[i] - mb);
        va += (ra[i] - ma) * (ra[i] - ma);
        vb += (rb[i] - mb) * (rb[i] - mb);
    }
    if (va == 0.0 || vb == 0.0) return 0.0;
    return num / std::sqrt(va * vb);
}

} // namespace rbmlab
