#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>

namespace lplasma {

struct MeanEstimate {
    double mean = 0.0;
    double std_error = 0.0;
};

/// Running mean; a constant input sequence returns that constant bit-exactly.
inline double running_mean(std::span<const double> xs) {
    double m = 0.0;
    std::size_t k = 0;
    for (double x : xs) m += (x - m) / static_cast<double>(++k);
    return m;
}

/// Mean with a batch-means standard error: the series is cut into
/// `batches` contiguous blocks (fewer if the series is short) and the spread
/// of block means gives the error, which accounts for autocorrelation shorter
/// than a block.
inline MeanEstimate batch_means(std::span<const double> xs, std::size_t batches = 20) {
    MeanEstimate out;
    if (xs.empty()) return out;
    out.mean = running_mean(xs);
    const std::size_t b = std::min(batches, xs.size());
    if (b < 2) return out;
    const std::size_t len = xs.size() / b;
    double acc = 0.0;
    for (std::size_t i = 0; i < b; ++i) {
        const double bm = running_mean(xs.subspan(i * len, len));
        acc += (bm - out.mean) * (bm - out.mean);
    }
    out.std_error = std::sqrt(acc / static_cast<double>(b - 1) / static_cast<double>(b));
    return out;
}

} // namespace lplasma
