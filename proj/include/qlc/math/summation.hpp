#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace qlc::math {

/// Pairwise summation in a fixed tree order. The result depends only on the
/// input sequence, never on how the values were produced.
inline double pairwise_sum(std::span<const double> v) {
    constexpr std::size_t kBlock = 128;
    if (v.size() <= kBlock) {
        double acc = 0.0;
        for (double x : v) acc += x;
        return acc;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

inline double mean(std::span<const double> v) {
    return v.empty() ? 0.0 : pairwise_sum(v) / static_cast<double>(v.size());
}

struct SampleMoments {
    double mean = 0.0;
    double variance = 0.0;  // unbiased
    double std_error = 0.0;
    std::size_t count = 0;
};

/// Mean, unbiased variance and standard error of the mean (two-pass).
inline SampleMoments moments(std::span<const double> v) {
    SampleMoments m;
    m.count = v.size();
    if (v.empty()) return m;
    m.mean = mean(v);
    if (v.size() < 2) return m;
    std::vector<double> sq(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double d = v[i] - m.mean;
        sq[i] = d * d;
    }
    m.variance = pairwise_sum(sq) / static_cast<double>(v.size() - 1);
    m.std_error = std::sqrt(m.variance / static_cast<double>(v.size()));
    return m;
}

}  // namespace qlc::math
