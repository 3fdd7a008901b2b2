#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "qlc/error.hpp"
#include "qlc/localvol/surface.hpp"

namespace qlc {

/// Square-root variance process dv = kappa (theta - v) dt + xi sqrt(v) dW,
/// with corr(dW, price driver) = rho.
struct VarianceSpec {
    double kappa = 1.0;
    double theta = 1.0;
    double xi = 0.0;
    double v0 = 1.0;
    double rho = 0.0;

    void validate(const char* factor) const {
        const bool ok = kappa > 0.0 && theta > 0.0 && v0 > 0.0 && xi >= 0.0 && rho >= -1.0 && rho <= 1.0 &&
                        std::isfinite(kappa + theta + xi + v0 + rho);
        if (!ok) {
            throw InvalidInput(std::string("variance spec (") + factor +
                               "): need kappa, theta, v0 > 0, xi >= 0, |rho| <= 1");
        }
    }

    /// 2 kappa theta / xi^2; above 1 the process stays off zero.
    [[nodiscard]] double feller_ratio() const {
        return xi > 0.0 ? 2.0 * kappa * theta / (xi * xi) : std::numeric_limits<double>::infinity();
    }

    [[nodiscard]] bool deterministic_unit() const { return xi == 0.0 && v0 == 1.0 && theta == 1.0; }
};

/// Leverage l(t, k) = eta(t, k) * m(t, k), where m^2 = 1 / E[v | price = k]
/// is held on its own node grid. Keeping the local vol as a factor makes
/// the unit-variance case reproduce the local-vol model exactly.
class LeverageSurface {
public:
    LeverageSurface() = default;
    LeverageSurface(LocalVolSurface local_vol, LocalVolSurface ratio)
        : lv_(std::move(local_vol)), ratio_(std::move(ratio)) {}

    /// m == 1 everywhere.
    static LeverageSurface identity(LocalVolSurface local_vol) {
        const double t = local_vol.maturities().back();
        return {std::move(local_vol), LocalVolSurface::flat(1.0, t)};
    }

    [[nodiscard]] double operator()(double t, double k) const { return lv_(t, k) * ratio_(t, k); }
    [[nodiscard]] double ratio(double t, double k) const { return ratio_(t, k); }
    [[nodiscard]] const LocalVolSurface& local_vol() const { return lv_; }
    [[nodiscard]] const LocalVolSurface& ratio_surface() const { return ratio_; }

    /// Leverage values on the ratio nodes, for dumps.
    [[nodiscard]] LocalVolSurface nodes() const {
        auto slices = ratio_.slices();
        for (auto& s : slices) {
            for (std::size_t j = 0; j < s.values.size(); ++j) s.values[j] = lv_(s.maturity, s.moneyness[j]) * s.values[j];
        }
        return LocalVolSurface(std::move(slices));
    }

private:
    LocalVolSurface lv_;
    LocalVolSurface ratio_;
};

struct SlvModel {
    VarianceSpec asset;
    VarianceSpec fx;
    LeverageSurface asset_leverage;
    LeverageSurface fx_leverage;
};

}  // namespace qlc
