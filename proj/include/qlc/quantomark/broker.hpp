#pragma once

#include <cmath>
#include <string>

#include "qlc/error.hpp"

namespace qlc {

/// Market inputs needed to translate a synthetic quanto forward package
/// into a quanto correlation at one maturity.
struct BrokerContext {
    double maturity = 0.0;
    double fwd_ratio = 1.0;  // F(T) / S(0) of the asset
    double df_dom = 1.0;     // domestic discount factor to T
    double df_for = 1.0;     // foreign discount factor to T
    double sigma_s = 0.0;    // asset ATM vol at T
    double sigma_x = 0.0;    // FX ATM vol at T

    void validate() const {
        const bool ok = std::isfinite(maturity) && maturity > 0.0 && std::isfinite(fwd_ratio) && fwd_ratio > 0.0 &&
                        df_dom > 0.0 && df_dom <= 1.0 && df_for > 0.0 && df_for <= 1.0 && sigma_s > 0.0 &&
                        sigma_x > 0.0 && std::isfinite(sigma_s) && std::isfinite(sigma_x);
        if (!ok) throw InvalidInput("broker conversion: need T > 0, ratio > 0, dfs in (0, 1], vols > 0");
    }
};

// Package value per unit spot, C^q - P^q - C + P with ATM-spot strikes:
//
//   Gamma = (r q(T) - 1) df_dom - (r - 1) df_for,   q(T) = exp(-gamma sS sX T)
//
// written as r df_dom expm1(-gamma a) + (r - 1)(df_dom - df_for) so that the
// inversion below loses no digits for small packages.

inline double broker_from_gamma(double gamma, const BrokerContext& c) {
    c.validate();
    if (!std::isfinite(gamma)) throw InvalidInput("broker conversion: non-finite correlation");
    const double a = c.sigma_s * c.sigma_x * c.maturity;
    return c.fwd_ratio * c.df_dom * std::expm1(-gamma * a) + (c.fwd_ratio - 1.0) * (c.df_dom - c.df_for);
}

inline double gamma_from_broker(double package, const BrokerContext& c) {
    c.validate();
    if (!std::isfinite(package)) throw InvalidInput("broker conversion: non-finite package price");
    const double a = c.sigma_s * c.sigma_x * c.maturity;
    const double u = (package - (c.fwd_ratio - 1.0) * (c.df_dom - c.df_for)) / (c.fwd_ratio * c.df_dom);
    if (!(u > -1.0)) {
        throw NoSolution("broker conversion: package " + std::to_string(package) +
                         " implies a non-positive quanto correction");
    }
    return -std::log1p(u) / a;
}

}  // namespace qlc
