#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "qlc/error.hpp"
#include "qlc/marketdata/csv.hpp"
#include "qlc/marketdata/curves.hpp"
#include "qlc/marketdata/quotes.hpp"

namespace qlc {

/// Everything observed on one date: the asset is quoted in the foreign
/// currency and the FX rate converts foreign into domestic.
struct MarketSnapshot {
    std::string observation_date;
    DiscountCurve domestic;
    DiscountCurve foreign;
    ForwardCurve asset_forward;
    ForwardCurve fx_forward;
    VolQuoteSurface asset_vols;
    VolQuoteSurface fx_vols;
    QuantoQuoteSet quanto;
    std::optional<VolQuoteSurface> composite_vols;

    /// F(T) / S(0) for the asset.
    [[nodiscard]] double forward_ratio(double t) const { return asset_forward.forward(t) / asset_forward.spot(); }
};

namespace detail {

inline DiscountCurve load_curve(const std::string& path, const std::string& currency) {
    const auto rows = csv::read(path, {"time_yf", "discount_factor"});
    std::vector<double> t, df;
    for (const auto& r : rows) {
        t.push_back(csv::to_double(path, r, 0));
        df.push_back(csv::to_double(path, r, 1));
        if (!(df.back() > 0.0)) {
            throw LoadError(path + ": line " + std::to_string(r.line) + ": discount factor must be positive");
        }
        if (t.size() > 1 && !(t.back() > t[t.size() - 2])) {
            throw LoadError(path + ": line " + std::to_string(r.line) + ": times must be strictly increasing");
        }
    }
    try {
        return DiscountCurve(currency, t, df);
    } catch (const InvalidInput& e) {
        throw LoadError(path + ": " + e.what());
    }
}

inline ForwardCurve load_forwards(const std::string& path, double spot) {
    const auto rows = csv::read(path, {"time_yf", "forward"});
    std::vector<double> t, f;
    for (const auto& r : rows) {
        t.push_back(csv::to_double(path, r, 0));
        f.push_back(csv::to_double(path, r, 1));
        if (!(f.back() > 0.0)) {
            throw LoadError(path + ": line " + std::to_string(r.line) + ": forward must be positive");
        }
    }
    try {
        return ForwardCurve(spot, t, f);
    } catch (const InvalidInput& e) {
        throw LoadError(path + ": " + e.what());
    }
}

inline VolQuoteSurface load_vols(const std::string& path, const std::string& date) {
    const auto rows = csv::read(path, {"maturity_yf", "moneyness", "vol"});
    std::vector<std::tuple<double, double, double>> data;
    for (const auto& r : rows) {
        const double t = csv::to_double(path, r, 0);
        const double k = csv::to_double(path, r, 1);
        const double v = csv::to_double(path, r, 2);
        if (!(v > 0.0)) throw LoadError(path + ": line " + std::to_string(r.line) + ": vol must be positive");
        if (!(k > 0.0)) throw LoadError(path + ": line " + std::to_string(r.line) + ": moneyness must be positive");
        if (!(t > 0.0)) throw LoadError(path + ": line " + std::to_string(r.line) + ": maturity must be positive");
        data.emplace_back(t, k, v);
    }
    try {
        return VolQuoteSurface::from_rows(date, data);
    } catch (const InvalidInput& e) {
        throw LoadError(path + ": " + e.what());
    }
}

inline QuantoQuoteSet load_quanto(const std::string& path) {
    const auto rows = csv::read(path, {"label", "maturity_yf", "bid", "mid", "ask", "convention"});
    std::vector<QuantoQuote> quotes;
    std::optional<QuantoConvention> convention;
    for (const auto& r : rows) {
        QuantoQuote q;
        q.label = r.fields[0];
        q.maturity = csv::to_double(path, r, 1);
        q.bid = csv::to_double(path, r, 2);
        q.mid = csv::to_double(path, r, 3);
        q.ask = csv::to_double(path, r, 4);
        const auto& c = r.fields[5];
        QuantoConvention this_conv;
        if (c == "gamma") {
            this_conv = QuantoConvention::Gamma;
        } else if (c == "price_bp") {
            this_conv = QuantoConvention::PriceBp;
        } else {
            throw LoadError(path + ": line " + std::to_string(r.line) + ": unknown convention '" + c + "'");
        }
        if (convention && *convention != this_conv) {
            throw LoadError(path + ": line " + std::to_string(r.line) + ": mixed conventions in one file");
        }
        convention = this_conv;
        if (!(q.bid <= q.mid && q.mid <= q.ask)) {
            throw LoadError(path + ": line " + std::to_string(r.line) + ": bid <= mid <= ask violated");
        }
        if (this_conv == QuantoConvention::Gamma && (q.bid < -1.0 || q.ask > 1.0)) {
            throw LoadError(path + ": line " + std::to_string(r.line) + ": correlation outside [-1, 1]");
        }
        if (!(q.maturity > 0.0)) {
            throw LoadError(path + ": line " + std::to_string(r.line) + ": maturity must be positive");
        }
        quotes.push_back(std::move(q));
    }
    if (!convention) throw LoadError(path + ": no quotes");
    try {
        return QuantoQuoteSet(*convention, std::move(quotes));
    } catch (const InvalidInput& e) {
        throw LoadError(path + ": " + e.what());
    }
}

}  // namespace detail

/// Reads a snapshot manifest (JSON) and every file it references. Relative
/// paths resolve against the manifest's directory.
///
/// {
///   "observation_date": "2024-12-16",
///   "domestic_curve": {"file": "usd.csv", "currency": "USD"},
///   "foreign_curve":  {"file": "eur.csv", "currency": "EUR"},
///   "asset_forward":  {"file": "asset_fwd.csv", "spot": 4950.0},
///   "fx_forward":     {"file": "fx_fwd.csv", "spot": 1.05},
///   "asset_vols":     {"file": "asset_vols.csv"},
///   "fx_vols":        {"file": "fx_vols.csv"},
///   "composite_vols": {"file": "composite_vols.csv"},   (optional)
///   "quanto":         {"file": "quanto.csv"}
/// }
///
/// Any role may repeat "observation_date"; it must match the manifest's.
inline MarketSnapshot load_snapshot(const std::filesystem::path& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw LoadError(manifest_path.string() + ": cannot open manifest");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw LoadError(manifest_path.string() + ": invalid JSON: " + e.what());
    }
    const auto base = manifest_path.parent_path();
    const std::string where = manifest_path.string();

    auto require = [&](const char* key) -> const nlohmann::json& {
        if (!doc.contains(key)) throw LoadError(where + ": missing '" + std::string(key) + "'");
        return doc.at(key);
    };
    if (!doc.contains("observation_date") || !doc["observation_date"].is_string()) {
        throw LoadError(where + ": missing string 'observation_date'");
    }
    MarketSnapshot snap;
    snap.observation_date = doc["observation_date"].get<std::string>();

    auto role_file = [&](const char* key) {
        const auto& role = require(key);
        if (!role.is_object() || !role.contains("file") || !role["file"].is_string()) {
            throw LoadError(where + ": role '" + std::string(key) + "' needs a 'file' entry");
        }
        if (role.contains("observation_date") && role["observation_date"] != doc["observation_date"]) {
            throw LoadError(where + ": role '" + std::string(key) + "' observation date " +
                            role["observation_date"].dump() + " differs from " + snap.observation_date);
        }
        std::filesystem::path p = role["file"].get<std::string>();
        if (p.is_relative()) p = base / p;
        return p.string();
    };
    auto number = [&](const char* key, const char* field) {
        const auto& role = require(key);
        if (!role.contains(field) || !role[field].is_number()) {
            throw LoadError(where + ": role '" + std::string(key) + "' needs numeric '" + field + "'");
        }
        return role[field].get<double>();
    };
    auto text = [&](const char* key, const char* field, const char* fallback) {
        const auto& role = require(key);
        return role.contains(field) ? role[field].get<std::string>() : std::string(fallback);
    };

    snap.domestic = detail::load_curve(role_file("domestic_curve"), text("domestic_curve", "currency", "DOM"));
    snap.foreign = detail::load_curve(role_file("foreign_curve"), text("foreign_curve", "currency", "FOR"));
    snap.asset_forward = detail::load_forwards(role_file("asset_forward"), number("asset_forward", "spot"));
    snap.fx_forward = detail::load_forwards(role_file("fx_forward"), number("fx_forward", "spot"));
    snap.asset_vols = detail::load_vols(role_file("asset_vols"), snap.observation_date);
    snap.fx_vols = detail::load_vols(role_file("fx_vols"), snap.observation_date);
    snap.quanto = detail::load_quanto(role_file("quanto"));
    if (doc.contains("composite_vols")) {
        snap.composite_vols = detail::load_vols(role_file("composite_vols"), snap.observation_date);
    }
    if (snap.domestic.currency() == snap.foreign.currency()) {
        throw LoadError(where + ": domestic and foreign curves share currency " + snap.domestic.currency());
    }
    return snap;
}

}  // namespace qlc
