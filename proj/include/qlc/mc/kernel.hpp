#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "qlc/error.hpp"
#include "qlc/math/summation.hpp"

namespace qlc::mc {

struct KernelSpec {
    double c = 1.5;              // bandwidth h = c * sd(u) * N^(-1/5)
    std::size_t grid = 512;      // binning grid size
    double min_weight = 50.0;    // effective local sample needed for an estimate
    double cutoff = 5.0;         // kernel truncated beyond cutoff * h

    void validate() const {
        if (!(c > 0.0) || grid < 16 || !(min_weight > 0.0) || !(cutoff > 0.0)) {
            throw InvalidInput("kernel spec: need c > 0, grid >= 16, min_weight > 0");
        }
    }
};

/// Binned Nadaraya-Watson regression with a Gaussian kernel over one
/// cross-section of the conditioning variable u (log z, log s, ...).
///
/// Samples are linearly binned onto a uniform grid spanning the sample, so
/// one regression costs O(N + G * h / du) regardless of N. Effective sample
/// at a grid point is the sum of unnormalized kernel weights. Queries beyond
/// the span of grid points with enough sample are answered by the nearest
/// supported grid point; those are counted as thin-tail queries.
class KernelSmoother {
public:
    KernelSmoother(std::span<const double> u, const KernelSpec& spec = {}) : spec_(spec), n_(u.size()) {
        spec.validate();
        if (u.empty()) throw InvalidInput("kernel regression: empty sample");
        const auto m = math::moments(u);
        const auto [lo_it, hi_it] = std::minmax_element(u.begin(), u.end());
        lo_ = *lo_it;
        hi_ = *hi_it;
        bandwidth_ = spec.c * std::sqrt(m.variance) * std::pow(static_cast<double>(n_), -0.2);
        // a cross-section that has not spread yet (t = 0): the conditional
        // expectation is the plain average
        if (!(hi_ - lo_ > 1e-12 * std::max(1.0, std::abs(lo_))) || !(bandwidth_ > 0.0)) {
            degenerate_ = true;
            if (static_cast<double>(n_) < spec.min_weight) {
                throw BandwidthTooSmall("kernel regression: only " + std::to_string(n_) + " samples");
            }
            return;
        }
        const std::size_t g = spec.grid;
        du_ = (hi_ - lo_) / static_cast<double>(g - 1);
        bins_.resize(n_);
        fracs_.resize(n_);
        std::vector<double> w(g, 0.0);
        for (std::size_t i = 0; i < n_; ++i) {
            const double p = std::clamp((u[i] - lo_) / du_, 0.0, static_cast<double>(g - 1));
            auto b = static_cast<std::size_t>(p);
            if (b >= g - 1) b = g - 2;
            bins_[i] = b;
            fracs_[i] = p - static_cast<double>(b);
            w[b] += 1.0 - fracs_[i];
            w[b + 1] += fracs_[i];
        }
        const double r = spec.cutoff * bandwidth_ / du_;
        reach_ = static_cast<std::size_t>(std::ceil(r));
        kernel_.resize(reach_ + 1);
        for (std::size_t d = 0; d <= reach_; ++d) {
            const double z = static_cast<double>(d) * du_ / bandwidth_;
            kernel_[d] = std::exp(-0.5 * z * z);
        }
        weight_ = convolve(w);
        for (std::size_t j = 0; j < g; ++j) {
            if (weight_[j] >= spec.min_weight) {
                if (!supported_) first_ = j;
                supported_ = true;
                last_ = j;
            }
        }
        if (!supported_) {
            throw BandwidthTooSmall("kernel regression: no grid point reaches an effective sample of " +
                                    std::to_string(spec.min_weight) + " (bandwidth " + std::to_string(bandwidth_) + ")");
        }
    }

    /// Grid of conditional means E[y | u] (or the global mean if degenerate).
    [[nodiscard]] std::vector<double> smooth(std::span<const double> y) const {
        if (y.size() != n_) throw InvalidInput("kernel regression: value count does not match sample");
        if (degenerate_) return {math::mean(y)};
        std::vector<double> yb(spec_.grid, 0.0);
        for (std::size_t i = 0; i < n_; ++i) {
            yb[bins_[i]] += (1.0 - fracs_[i]) * y[i];
            yb[bins_[i] + 1] += fracs_[i] * y[i];
        }
        auto s = convolve(yb);
        double prev = 0.0;
        bool have_prev = false;
        for (std::size_t j = 0; j < s.size(); ++j) {
            if (weight_[j] > 1e-300) {
                s[j] /= weight_[j];
                prev = s[j];
                have_prev = true;
            } else {
                s[j] = have_prev ? prev : 0.0;
            }
        }
        return s;
    }

    /// Conditional mean at u from a grid produced by smooth().
    [[nodiscard]] double at(const std::vector<double>& means, double u) const {
        if (degenerate_) return means.front();
        const double lo = lo_ + static_cast<double>(first_) * du_;
        const double hi = lo_ + static_cast<double>(last_) * du_;
        if (u <= lo) return means[first_];
        if (u >= hi) return means[last_];
        const double p = (u - lo_) / du_;
        auto b = static_cast<std::size_t>(p);
        if (b >= last_) return means[last_];
        const double f = p - static_cast<double>(b);
        return means[b] + f * (means[b + 1] - means[b]);
    }

    /// Whether u lies outside the well-sampled span.
    [[nodiscard]] bool thin(double u) const {
        if (degenerate_) return false;
        return u < lo_ + static_cast<double>(first_) * du_ || u > lo_ + static_cast<double>(last_) * du_;
    }

    /// Effective sample (sum of kernel weights) at u.
    [[nodiscard]] double effective_sample(double u) const {
        if (degenerate_) return static_cast<double>(n_);
        const double p = std::clamp((u - lo_) / du_, 0.0, static_cast<double>(spec_.grid - 1));
        auto b = std::min(static_cast<std::size_t>(p), spec_.grid - 2);
        const double f = p - static_cast<double>(b);
        return weight_[b] + f * (weight_[b + 1] - weight_[b]);
    }

    [[nodiscard]] double bandwidth() const { return bandwidth_; }
    [[nodiscard]] bool degenerate() const { return degenerate_; }
    [[nodiscard]] std::size_t size() const { return n_; }
    [[nodiscard]] double grid_point(std::size_t j) const { return lo_ + static_cast<double>(j) * du_; }
    [[nodiscard]] std::size_t first_supported() const { return first_; }
    [[nodiscard]] std::size_t last_supported() const { return last_; }

private:
    [[nodiscard]] std::vector<double> convolve(const std::vector<double>& v) const {
        const std::size_t g = v.size();
        std::vector<double> out(g, 0.0);
        for (std::size_t j = 0; j < g; ++j) {
            const std::size_t a = j > reach_ ? j - reach_ : 0;
            const std::size_t b = std::min(g - 1, j + reach_);
            double acc = 0.0;
            for (std::size_t i = a; i <= b; ++i) acc += kernel_[i > j ? i - j : j - i] * v[i];
            out[j] = acc;
        }
        return out;
    }

    KernelSpec spec_;
    std::size_t n_ = 0;
    double lo_ = 0.0, hi_ = 0.0, du_ = 1.0, bandwidth_ = 0.0;
    bool degenerate_ = false;
    bool supported_ = false;
    std::size_t first_ = 0, last_ = 0, reach_ = 0;
    std::vector<std::size_t> bins_;
    std::vector<double> fracs_;
    std::vector<double> kernel_;
    std::vector<double> weight_;
};

}  // namespace qlc::mc
