#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "qlc/error.hpp"

namespace qlc::math {

/// Fritsch-Carlson monotone cubic Hermite interpolant with flat
/// extrapolation outside [x_front, x_back].
///
/// On every interval the interpolant is monotone whenever the two bracketing
/// node values are ordered, so it never leaves [min, max] of those values.
class MonotoneSpline {
public:
    MonotoneSpline() = default;

    MonotoneSpline(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
        if (x_.empty() || x_.size() != y_.size()) {
            throw InvalidInput("monotone spline: need equal, non-empty node vectors");
        }
        for (std::size_t i = 0; i < x_.size(); ++i) {
            if (!std::isfinite(x_[i]) || !std::isfinite(y_[i])) {
                throw InvalidInput("monotone spline: non-finite node");
            }
            if (i > 0 && !(x_[i] > x_[i - 1])) {
                throw InvalidInput("monotone spline: abscissae must be strictly increasing");
            }
        }
        compute_slopes();
    }

    [[nodiscard]] double operator()(double t) const {
        const std::size_t n = x_.size();
        if (n == 1 || t <= x_.front()) return y_.front();
        if (t >= x_.back()) return y_.back();
        const auto it = std::upper_bound(x_.begin(), x_.end(), t);
        const std::size_t i = static_cast<std::size_t>(it - x_.begin()) - 1;
        if (t == x_[i]) return y_[i];
        // flat interval: exact, the Hermite basis does not sum to 1 in floating point
        if (y_[i] == y_[i + 1] && m_[i] == 0.0 && m_[i + 1] == 0.0) return y_[i];
        const double h = x_[i + 1] - x_[i];
        const double u = (t - x_[i]) / h;
        const double u2 = u * u;
        const double u3 = u2 * u;
        const double h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
        const double h10 = u3 - 2.0 * u2 + u;
        const double h01 = -2.0 * u3 + 3.0 * u2;
        const double h11 = u3 - u2;
        return h00 * y_[i] + h10 * h * m_[i] + h01 * y_[i + 1] + h11 * h * m_[i + 1];
    }

    [[nodiscard]] std::span<const double> nodes() const { return x_; }
    [[nodiscard]] std::span<const double> values() const { return y_; }
    [[nodiscard]] std::span<const double> slopes() const { return m_; }
    [[nodiscard]] std::size_t size() const { return x_.size(); }

private:
    void compute_slopes() {
        const std::size_t n = x_.size();
        m_.assign(n, 0.0);
        if (n < 2) return;
        std::vector<double> delta(n - 1);
        for (std::size_t k = 0; k + 1 < n; ++k) {
            delta[k] = (y_[k + 1] - y_[k]) / (x_[k + 1] - x_[k]);
        }
        m_[0] = delta[0];
        m_[n - 1] = delta[n - 2];
        for (std::size_t k = 1; k + 1 < n; ++k) {
            m_[k] = (delta[k - 1] * delta[k] <= 0.0) ? 0.0 : 0.5 * (delta[k - 1] + delta[k]);
        }
        for (std::size_t k = 0; k + 1 < n; ++k) {
            if (delta[k] == 0.0) {
                m_[k] = 0.0;
                m_[k + 1] = 0.0;
                continue;
            }
            const double a = m_[k] / delta[k];
            const double b = m_[k + 1] / delta[k];
            // endpoint slopes may point the wrong way after the interior pass
            if (a < 0.0) m_[k] = 0.0;
            if (b < 0.0) m_[k + 1] = 0.0;
            const double r2 = a * a + b * b;
            if (r2 > 9.0) {
                const double tau = 3.0 / std::sqrt(r2);
                m_[k] = tau * a * delta[k];
                m_[k + 1] = tau * b * delta[k];
            }
        }
    }

    std::vector<double> x_;
    std::vector<double> y_;
    std::vector<double> m_;
};

}  // namespace qlc::math
