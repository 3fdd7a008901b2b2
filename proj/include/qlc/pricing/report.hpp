#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "qlc/error.hpp"
#include "qlc/format.hpp"
#include "qlc/marketdata/black.hpp"
#include "qlc/marketdata/quotes.hpp"
#include "qlc/math/normal.hpp"
#include "qlc/math/summation.hpp"
#include "qlc/mc/engine.hpp"
#include "qlc/pricing/pricing.hpp"

namespace qlc {

enum class ContractKind { Quanto, Composite };

inline const char* to_string(ContractKind k) { return k == ContractKind::Quanto ? "quanto" : "composite"; }

struct SpreadPoint {
    double moneyness = 0.0;
    double model_vol = std::numeric_limits<double>::quiet_NaN();
    double model_vol_se = std::numeric_limits<double>::quiet_NaN();
    double market_vol = 0.0;
    double spread = std::numeric_limits<double>::quiet_NaN();  // bp for quanto, percent for composite
    std::string note;                                          // inversion failure, if any
};

struct SpreadReport {
    ContractKind kind = ContractKind::Quanto;
    std::string label;
    double maturity = 0.0;
    std::vector<SpreadPoint> points;
};

/// Spread units: basis points for quanto, percent for composite.
inline double spread_scale(ContractKind k) { return k == ContractKind::Quanto ? 1e4 : 1e2; }

/// Implied vol of an out-of-the-money normalized option on the simulated
/// underlying u (s for quanto, x s for composite) struck at K times the
/// forward. The forward is the sample mean of u for quanto (or `forward`
/// when given) and 1 for composite. The standard error linearizes both the
/// price and the forward estimate: d vol = (dP - delta dF) / vega.
inline ImpliedVolEstimate mc_implied_vol(std::span<const double> u, double T, double K, double forward,
                                         bool sample_forward) {
    const auto fm = math::moments(u);
    const double F = sample_forward ? fm.mean : forward;
    const double strike = K * F;
    const OptionKind kind = K < 1.0 ? OptionKind::Put : OptionKind::Call;
    std::vector<double> pay(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        pay[i] = std::max(kind == OptionKind::Call ? u[i] - strike : strike - u[i], 0.0);
    }
    ImpliedVolEstimate out;
    const auto pm = math::moments(pay);
    try {
        out.vol = implied_vol(pm.mean, F, strike, T, 1.0, kind);
    } catch (const Error& e) {
        out.note = e.what();
        return out;
    }
    const double sd = out.vol * std::sqrt(T);
    const double vega = black_vega(F, strike, out.vol, T, 1.0);
    if (!(vega > 0.0)) {
        out.std_error = std::numeric_limits<double>::infinity();
        return out;
    }
    if (sample_forward) {
        // strike moves with the forward: dP/dF = N(d1) - K N(d2) (call), ... - K ... (put)
        const double d1 = -std::log(K) / sd + 0.5 * sd;
        const double d2 = d1 - sd;
        const double delta = kind == OptionKind::Call ? math::norm_cdf(d1) - K * math::norm_cdf(d2)
                                                      : K * math::norm_cdf(-d2) - math::norm_cdf(-d1);
        std::vector<double> r(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) r[i] = pay[i] - delta * u[i];
        out.std_error = math::moments(r).std_error / vega;
    } else {
        out.std_error = pm.std_error / vega;
    }
    return out;
}

/// Model implied vol minus the asset's market vol at every quoted
/// moneyness of the requested maturity. Quanto options invert against the
/// simulated forward unless `quanto_forward` (e.g. q(T)) is given.
inline SpreadReport implied_vol_spread_report(const mc::SimResult& sim, const VolQuoteSurface& market, double T,
                                              ContractKind kind, const std::string& label = "",
                                              double quanto_forward = 0.0) {
    const VolSlice* slice = market.find(T);
    if (!slice) throw ConfigError("spread report: maturity " + std::to_string(T) + " is not a quoted pillar");
    const auto obs = sim.observation_index(T);
    std::vector<double> u(sim.s[obs]);
    double forward = 1.0;
    bool sample_forward = false;
    if (kind == ContractKind::Composite) {
        for (std::size_t i = 0; i < u.size(); ++i) u[i] *= sim.x[obs][i];
    } else {
        // the model's own forward by default; q(T) when the caller passes it
        sample_forward = !(quanto_forward > 0.0);
        if (!sample_forward) forward = quanto_forward;
    }
    SpreadReport rep;
    rep.kind = kind;
    rep.label = label.empty() ? format_sig(T) : label;
    rep.maturity = T;
    for (std::size_t j = 0; j < slice->moneyness.size(); ++j) {
        SpreadPoint p;
        p.moneyness = slice->moneyness[j];
        p.market_vol = slice->vols[j];
        const auto iv = mc_implied_vol(u, T, p.moneyness, forward, sample_forward);
        p.model_vol = iv.vol;
        p.model_vol_se = iv.std_error;
        p.note = iv.note;
        if (iv.ok()) p.spread = (iv.vol - p.market_vol) * spread_scale(kind);
        rep.points.push_back(p);
    }
    return rep;
}

inline void write_spread_csv(const std::vector<SpreadReport>& reports, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw LoadError("cannot write " + path.string());
    out << "kind,maturity_label,moneyness,model_vol,market_vol,spread\n";
    for (const auto& r : reports) {
        for (const auto& p : r.points) {
            out << to_string(r.kind) << ',' << r.label << ',' << format_sig(p.moneyness) << ','
                << (std::isfinite(p.model_vol) ? format_sig(p.model_vol) : "nan") << ',' << format_sig(p.market_vol)
                << ',' << (std::isfinite(p.spread) ? format_sig(p.spread) : "nan") << '\n';
        }
    }
}

}  // namespace qlc
