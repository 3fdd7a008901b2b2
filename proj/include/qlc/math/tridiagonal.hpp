#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace qlc::math {

/// Thomas algorithm for a[i] x[i-1] + b[i] x[i] + c[i] x[i+1] = d[i].
/// `scratch` must hold n entries; `d` is overwritten with the solution.
inline void solve_tridiagonal(std::span<const double> a, std::span<const double> b, std::span<const double> c,
                              std::span<double> d, std::vector<double>& scratch) {
    const std::size_t n = d.size();
    scratch.resize(n);
    double beta = b[0];
    d[0] /= beta;
    for (std::size_t i = 1; i < n; ++i) {
        scratch[i] = c[i - 1] / beta;
        beta = b[i] - a[i] * scratch[i];
        d[i] = (d[i] - a[i] * d[i - 1]) / beta;
    }
    for (std::size_t i = n - 1; i-- > 0;) {
        d[i] -= scratch[i + 1] * d[i + 1];
    }
}

}  // namespace qlc::math
