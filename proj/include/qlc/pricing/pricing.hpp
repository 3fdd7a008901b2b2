#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "qlc/error.hpp"
#include "qlc/marketdata/black.hpp"
#include "qlc/math/summation.hpp"
#include "qlc/mc/engine.hpp"
#include "qlc/quantomark/broker.hpp"

namespace qlc {

inline constexpr double kConfidenceZ = 1.96;

/// Monte Carlo estimate with its 95% interval.
struct PriceResult {
    double estimate = 0.0;
    double std_error = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::size_t n_paths = 0;
    mc::ClipStats clip;

    [[nodiscard]] double ci_halfwidth() const { return kConfidenceZ * std_error; }
};

inline PriceResult price_from_samples(std::span<const double> v, const mc::ClipStats& clip = {}) {
    const auto m = math::moments(v);
    PriceResult r;
    r.estimate = m.mean;
    r.std_error = m.std_error;
    r.ci_low = m.mean - kConfidenceZ * m.std_error;
    r.ci_high = m.mean + kConfidenceZ * m.std_error;
    r.n_paths = m.count;
    r.clip = clip;
    return r;
}

/// E[S(T)] in domestic units per unit of quanto notional: E[s_T] F(T).
inline PriceResult price_quanto_forward(const mc::SimResult& sim, double T, double forward) {
    const auto& s = sim.s[sim.observation_index(T)];
    std::vector<double> v(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) v[i] = s[i] * forward;
    return price_from_samples(v, sim.total_stats());
}

/// Broker package C^q - P^q - C + P with strikes at spot, per unit spot.
/// The quanto legs come from the domestic run, the plain legs from a
/// foreign-measure companion run with the same seed, paired path by path.
inline PriceResult price_gamma_package(const mc::SimResult& domestic, const mc::SimResult& foreign, double T,
                                       double fwd_ratio, double df_dom, double df_for) {
    if (domestic.measure != mc::Measure::Domestic || foreign.measure != mc::Measure::Foreign) {
        throw ConfigError("gamma package: need a domestic run and a foreign companion run");
    }
    if (domestic.n_paths != foreign.n_paths || domestic.seed != foreign.seed) {
        throw ConfigError("gamma package: companion run must share path count and seed");
    }
    const auto& sd = domestic.s[domestic.observation_index(T)];
    const auto& sf = foreign.s[foreign.observation_index(T)];
    std::vector<double> v(sd.size());
    for (std::size_t i = 0; i < sd.size(); ++i) {
        const double a = fwd_ratio * sd[i], b = fwd_ratio * sf[i];
        const double quanto = std::max(a - 1.0, 0.0) - std::max(1.0 - a, 0.0);
        const double plain = std::max(b - 1.0, 0.0) - std::max(1.0 - b, 0.0);
        v[i] = df_dom * quanto - df_for * plain;
    }
    return price_from_samples(v, domestic.total_stats());
}

/// Quanto vanilla: df (s_T F - K F)^+ (or the put), K in forward moneyness.
inline PriceResult price_quanto_vanilla(const mc::SimResult& sim, double T, double K, OptionKind kind, double forward,
                                        double df_dom) {
    if (!(K > 0.0)) throw InvalidInput("quanto vanilla: strike must be positive");
    const auto& s = sim.s[sim.observation_index(T)];
    std::vector<double> v(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double p = kind == OptionKind::Call ? s[i] - K : K - s[i];
        v[i] = df_dom * forward * std::max(p, 0.0);
    }
    return price_from_samples(v, sim.total_stats());
}

/// Composite vanilla on Z = z X(T) F(T); K in moneyness of Z.
inline PriceResult price_composite_vanilla(const mc::SimResult& sim, double T, double K, OptionKind kind,
                                           double composite_forward, double df_dom) {
    if (!(K > 0.0)) throw InvalidInput("composite vanilla: strike must be positive");
    const auto i_obs = sim.observation_index(T);
    const auto& s = sim.s[i_obs];
    const auto& x = sim.x[i_obs];
    std::vector<double> v(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double z = s[i] * x[i];
        const double p = kind == OptionKind::Call ? z - K : K - z;
        v[i] = df_dom * composite_forward * std::max(p, 0.0);
    }
    return price_from_samples(v, sim.total_stats());
}

/// Implied vol of a normalized (unit forward notional, undiscounted) MC
/// price, with a delta-method standard error. NaN when the inversion fails.
struct ImpliedVolEstimate {
    double vol = std::numeric_limits<double>::quiet_NaN();
    double std_error = std::numeric_limits<double>::quiet_NaN();
    std::string note;
    [[nodiscard]] bool ok() const { return std::isfinite(vol); }
};

inline ImpliedVolEstimate implied_from_mc(const PriceResult& normalized, double forward, double K, double T,
                                          OptionKind kind) {
    ImpliedVolEstimate out;
    try {
        out.vol = implied_vol(normalized.estimate, forward, K, T, 1.0, kind);
        const double vega = black_vega(forward, K, out.vol, T, 1.0);
        out.std_error = vega > 0.0 ? normalized.std_error / vega : std::numeric_limits<double>::infinity();
    } catch (const Error& e) {
        out.vol = std::numeric_limits<double>::quiet_NaN();
        out.note = e.what();
    }
    return out;
}

}  // namespace qlc
