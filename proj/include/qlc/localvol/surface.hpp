#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "qlc/error.hpp"
#include "qlc/math/monotone_spline.hpp"

namespace qlc {

/// Node slice of a local-vol (or leverage) surface at one maturity.
struct LocalVolSlice {
    double maturity = 0.0;
    std::vector<double> moneyness;
    std::vector<double> values;
};

/// Non-parametric local-vol surface. Piecewise constant in time: slice i
/// covers (t_{i-1}, t_i], the first slice also covers [0, t_1] and the last
/// one everything beyond t_N. In moneyness each slice is a Fritsch-Carlson
/// monotone cubic between its nodes and flat outside them.
class LocalVolSurface {
public:
    LocalVolSurface() = default;

    explicit LocalVolSurface(std::vector<LocalVolSlice> slices) : slices_(std::move(slices)) {
        if (slices_.empty()) throw InvalidInput("local-vol surface: no slices");
        double prev = 0.0;
        splines_.reserve(slices_.size());
        times_.reserve(slices_.size());
        for (const auto& s : slices_) {
            if (!(s.maturity > prev)) {
                throw InvalidInput("local-vol surface: maturities must be positive and strictly increasing");
            }
            prev = s.maturity;
            for (double v : s.values) {
                if (!std::isfinite(v) || !(v > 0.0)) {
                    throw InvalidInput("local-vol surface: node values must be positive at maturity " +
                                       std::to_string(s.maturity));
                }
            }
            splines_.emplace_back(s.moneyness, s.values);
            times_.push_back(s.maturity);
        }
    }

    /// Constant surface with a single ATM node.
    static LocalVolSurface flat(double vol, double maturity = 1.0) {
        return LocalVolSurface({LocalVolSlice{maturity, {1.0}, {vol}}});
    }

    /// Index of the slice governing time t.
    [[nodiscard]] std::size_t slice_index(double t) const {
        const auto it = std::lower_bound(times_.begin(), times_.end(), t);
        const auto i = static_cast<std::size_t>(it - times_.begin());
        return std::min(i, times_.size() - 1);
    }

    [[nodiscard]] double operator()(double t, double k) const { return splines_[slice_index(t)](k); }

    [[nodiscard]] const math::MonotoneSpline& slice_spline(std::size_t i) const { return splines_[i]; }
    [[nodiscard]] const std::vector<LocalVolSlice>& slices() const { return slices_; }
    [[nodiscard]] const std::vector<double>& maturities() const { return times_; }
    [[nodiscard]] std::size_t size() const { return slices_.size(); }

    /// Copy with replaced node values (same node layout).
    [[nodiscard]] LocalVolSurface with_values(const std::vector<std::vector<double>>& values) const {
        auto slices = slices_;
        for (std::size_t i = 0; i < slices.size(); ++i) slices[i].values = values.at(i);
        return LocalVolSurface(std::move(slices));
    }

private:
    std::vector<LocalVolSlice> slices_;
    std::vector<math::MonotoneSpline> splines_;
    std::vector<double> times_;
};

/// Evaluates a surface at time t and forward moneyness k.
inline double eval_lv(const LocalVolSurface& surface, double t, double k) {
    if (t < 0.0 || !(k > 0.0)) throw InvalidInput("eval_lv: need t >= 0 and k > 0");
    return surface(t, k);
}

}  // namespace qlc
