#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "qlc/error.hpp"
#include "qlc/math/normal.hpp"

namespace qlc {

enum class OptionKind { Call, Put };

inline const char* to_string(OptionKind kind) { return kind == OptionKind::Call ? "call" : "put"; }

namespace detail {

inline void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw InvalidInput(std::string("non-finite ") + what);
}

// Undiscounted Black value.
inline double black_undiscounted(double forward, double strike, double stdev, OptionKind kind) {
    if (stdev <= 0.0) {
        return kind == OptionKind::Call ? std::max(forward - strike, 0.0) : std::max(strike - forward, 0.0);
    }
    const double d1 = std::log(forward / strike) / stdev + 0.5 * stdev;
    const double d2 = d1 - stdev;
    if (kind == OptionKind::Call) {
        return forward * math::norm_cdf(d1) - strike * math::norm_cdf(d2);
    }
    return strike * math::norm_cdf(-d2) - forward * math::norm_cdf(-d1);
}

}  // namespace detail

/// Black price of a European option on a forward, discounted with `df`.
inline double black_price(double forward, double strike, double vol, double expiry, double df, OptionKind kind) {
    detail::require_finite(forward, "forward");
    detail::require_finite(strike, "strike");
    detail::require_finite(vol, "vol");
    detail::require_finite(expiry, "expiry");
    detail::require_finite(df, "discount factor");
    if (forward <= 0.0 || strike <= 0.0) throw InvalidInput("black_price: forward and strike must be positive");
    if (expiry < 0.0 || vol < 0.0) throw InvalidInput("black_price: expiry and vol must be non-negative");
    if (df <= 0.0 || df > 1.0) throw InvalidInput("black_price: discount factor must lie in (0, 1]");
    return df * detail::black_undiscounted(forward, strike, vol * std::sqrt(expiry), kind);
}

/// Vega (per unit vol) of the discounted Black price.
inline double black_vega(double forward, double strike, double vol, double expiry, double df) {
    const double sqrt_t = std::sqrt(expiry);
    const double stdev = vol * sqrt_t;
    if (stdev <= 0.0) return 0.0;
    const double d1 = std::log(forward / strike) / stdev + 0.5 * stdev;
    return df * forward * math::norm_pdf(d1) * sqrt_t;
}

struct ImpliedVolSettings {
    double vol_low = 1e-6;
    double vol_high = 5.0;
    double price_tolerance = 1e-10;
    int max_iterations = 100;
};

/// Black implied volatility by a bracketed Newton iteration with bisection
/// fallback. The search runs on the out-of-the-money leg, which keeps the
/// residual well conditioned on both wings.
inline double implied_vol(double price, double forward, double strike, double expiry, double df, OptionKind kind,
                          const ImpliedVolSettings& settings = {}) {
    detail::require_finite(price, "price");
    detail::require_finite(forward, "forward");
    detail::require_finite(strike, "strike");
    detail::require_finite(expiry, "expiry");
    detail::require_finite(df, "discount factor");
    if (forward <= 0.0 || strike <= 0.0) throw InvalidInput("implied_vol: forward and strike must be positive");
    if (expiry < 0.0) throw InvalidInput("implied_vol: negative expiry");
    if (df <= 0.0 || df > 1.0) throw InvalidInput("implied_vol: discount factor must lie in (0, 1]");

    const double p = price / df;
    const double scale = std::max(forward, strike);
    const double intrinsic =
        kind == OptionKind::Call ? std::max(forward - strike, 0.0) : std::max(strike - forward, 0.0);
    const double upper = kind == OptionKind::Call ? forward : strike;
    const double tiny = 1e-14 * scale;

    if (p >= upper) {
        throw NoSolution("implied_vol: price " + std::to_string(price) + " violates the upper arbitrage bound " +
                         std::to_string(df * upper));
    }
    const double time_value = p - intrinsic;
    if (time_value < -settings.price_tolerance) {
        throw NoSolution("implied_vol: price " + std::to_string(price) +
                         " is below the discounted intrinsic value " + std::to_string(df * intrinsic));
    }
    if (time_value <= tiny || expiry == 0.0) {
        if (time_value > settings.price_tolerance) {
            throw NoSolution("implied_vol: positive time value with zero expiry");
        }
        return 0.0;
    }

    // price of the out-of-the-money leg equals the time value of either leg
    const OptionKind otm = forward <= strike ? OptionKind::Call : OptionKind::Put;
    const double sqrt_t = std::sqrt(expiry);
    auto residual = [&](double vol) {
        return detail::black_undiscounted(forward, strike, vol * sqrt_t, otm) - time_value;
    };

    double lo = settings.vol_low;
    double hi = settings.vol_high;
    double f_hi = residual(hi);
    if (f_hi < 0.0) {
        throw NoSolution("implied_vol: price " + std::to_string(price) + " requires a vol above " +
                         std::to_string(hi));
    }
    double f_lo = residual(lo);
    if (f_lo > 0.0) {
        hi = lo;
        lo = 0.0;
    }

    double vol = std::clamp(std::sqrt(2.0 * std::abs(std::log(forward / strike)) / expiry), lo, hi);
    if (!(vol > lo && vol < hi)) vol = 0.5 * (lo + hi);
    for (int it = 0; it < settings.max_iterations; ++it) {
        const double f = residual(vol);
        if (f == 0.0) return vol;
        if (f > 0.0) {
            hi = vol;
        } else {
            lo = vol;
        }
        const double stdev = vol * sqrt_t;
        const double d1 = std::log(forward / strike) / stdev + 0.5 * stdev;
        const double vega = forward * math::norm_pdf(d1) * sqrt_t;
        double next = vega > 0.0 ? vol - f / vega : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - vol) <= 1e-15 * std::max(1.0, vol) || hi - lo <= 1e-16) {
            vol = next;
            break;
        }
        vol = next;
    }
    if (std::abs(residual(vol)) * df > settings.price_tolerance) {
        throw NoSolution("implied_vol: no convergence within the iteration budget");
    }
    return vol;
}

}  // namespace qlc
