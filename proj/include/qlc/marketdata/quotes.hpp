#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "qlc/error.hpp"

namespace qlc {

/// One maturity row of vanilla quotes in forward moneyness.
struct VolSlice {
    double maturity = 0.0;
    std::vector<double> moneyness;
    std::vector<double> vols;
    std::size_t atm_index = 0;

    [[nodiscard]] double atm_vol() const { return vols[atm_index]; }
};

inline constexpr double kAtmTolerance = 1e-9;

/// Vanilla implied-vol quotes for one underlying on one observation date.
class VolQuoteSurface {
public:
    VolQuoteSurface() = default;

    VolQuoteSurface(std::string observation_date, std::vector<VolSlice> slices)
        : date_(std::move(observation_date)), slices_(std::move(slices)) {
        validate();
    }

    /// Groups flat (maturity, moneyness, vol) rows into slices.
    static VolQuoteSurface from_rows(std::string observation_date,
                                     const std::vector<std::tuple<double, double, double>>& rows) {
        std::map<double, VolSlice> by_maturity;
        for (const auto& [t, k, v] : rows) {
            auto& slice = by_maturity[t];
            slice.maturity = t;
            slice.moneyness.push_back(k);
            slice.vols.push_back(v);
        }
        std::vector<VolSlice> slices;
        for (auto& [t, slice] : by_maturity) slices.push_back(std::move(slice));
        return VolQuoteSurface(std::move(observation_date), std::move(slices));
    }

    [[nodiscard]] const std::string& observation_date() const { return date_; }
    [[nodiscard]] const std::vector<VolSlice>& slices() const { return slices_; }
    [[nodiscard]] std::size_t size() const { return slices_.size(); }
    [[nodiscard]] const VolSlice& operator[](std::size_t i) const { return slices_[i]; }

    /// Slice whose maturity equals `t` within `tol`, if any.
    [[nodiscard]] const VolSlice* find(double t, double tol = 1e-8) const {
        for (const auto& s : slices_) {
            if (std::abs(s.maturity - t) <= tol) return &s;
        }
        return nullptr;
    }

    /// Quoted vol at (t, k) by linear interpolation in k within the slice at t.
    [[nodiscard]] std::optional<double> vol_at(double t, double k) const {
        const VolSlice* s = find(t);
        if (s == nullptr) return std::nullopt;
        const auto& m = s->moneyness;
        if (k <= m.front()) return s->vols.front();
        if (k >= m.back()) return s->vols.back();
        const auto it = std::lower_bound(m.begin(), m.end(), k);
        const std::size_t j = static_cast<std::size_t>(it - m.begin());
        if (m[j] == k) return s->vols[j];
        const double w = (k - m[j - 1]) / (m[j] - m[j - 1]);
        return s->vols[j - 1] + w * (s->vols[j] - s->vols[j - 1]);
    }

    /// True when ATM total variance is strictly increasing across maturities.
    [[nodiscard]] bool atm_variance_increasing() const {
        double prev = 0.0;
        for (const auto& s : slices_) {
            const double w = s.atm_vol() * s.atm_vol() * s.maturity;
            if (!(w > prev)) return false;
            prev = w;
        }
        return true;
    }

private:
    void validate() {
        if (slices_.empty()) throw InvalidInput("vol surface: no quotes");
        double prev_t = 0.0;
        for (auto& s : slices_) {
            if (!(s.maturity > prev_t)) {
                throw InvalidInput("vol surface: maturities must be positive and strictly increasing");
            }
            prev_t = s.maturity;
            if (s.moneyness.size() != s.vols.size() || s.moneyness.empty()) {
                throw InvalidInput("vol surface: malformed slice at maturity " + std::to_string(s.maturity));
            }
            std::optional<std::size_t> atm;
            for (std::size_t j = 0; j < s.moneyness.size(); ++j) {
                if (!std::isfinite(s.vols[j]) || !(s.vols[j] > 0.0)) {
                    throw InvalidInput("vol surface: non-positive vol at maturity " + std::to_string(s.maturity));
                }
                if (!(s.moneyness[j] > 0.0)) throw InvalidInput("vol surface: moneyness must be positive");
                if (j > 0 && !(s.moneyness[j] > s.moneyness[j - 1])) {
                    throw InvalidInput("vol surface: moneyness must be strictly increasing at maturity " +
                                       std::to_string(s.maturity));
                }
                if (std::abs(s.moneyness[j] - 1.0) <= kAtmTolerance) {
                    if (atm) throw InvalidInput("vol surface: duplicate ATM node");
                    atm = j;
                }
            }
            if (!atm) {
                throw InvalidInput("vol surface: no ATM node (moneyness 1) at maturity " + std::to_string(s.maturity));
            }
            s.atm_index = *atm;
        }
    }

    std::string date_;
    std::vector<VolSlice> slices_;
};

enum class QuantoConvention { Gamma, PriceBp };

inline const char* to_string(QuantoConvention c) { return c == QuantoConvention::Gamma ? "gamma" : "price_bp"; }

enum class QuoteSide { Bid, Mid, Ask };

struct QuantoQuote {
    std::string label;
    double maturity = 0.0;
    double bid = 0.0;
    double mid = 0.0;
    double ask = 0.0;

    [[nodiscard]] double side(QuoteSide s) const {
        return s == QuoteSide::Bid ? bid : (s == QuoteSide::Ask ? ask : mid);
    }
};

/// Broker quotes on synthetic quanto forwards, as packages in bp or as
/// quanto correlations.
class QuantoQuoteSet {
public:
    QuantoQuoteSet() = default;

    QuantoQuoteSet(QuantoConvention convention, std::vector<QuantoQuote> quotes)
        : convention_(convention), quotes_(std::move(quotes)) {
        if (quotes_.empty()) throw InvalidInput("quanto quotes: empty set");
        std::sort(quotes_.begin(), quotes_.end(),
                  [](const QuantoQuote& a, const QuantoQuote& b) { return a.maturity < b.maturity; });
        for (std::size_t i = 0; i < quotes_.size(); ++i) {
            const auto& q = quotes_[i];
            if (!(q.maturity > 0.0)) throw InvalidInput("quanto quotes: maturity must be positive (" + q.label + ")");
            if (i > 0 && !(q.maturity > quotes_[i - 1].maturity)) {
                throw InvalidInput("quanto quotes: duplicate maturity (" + q.label + ")");
            }
            if (!(q.bid <= q.mid && q.mid <= q.ask)) {
                throw InvalidInput("quanto quotes: bid <= mid <= ask violated (" + q.label + ")");
            }
            if (convention_ == QuantoConvention::Gamma && (q.bid < -1.0 || q.ask > 1.0)) {
                throw InvalidInput("quanto quotes: correlation outside [-1, 1] (" + q.label + ")");
            }
        }
    }

    [[nodiscard]] QuantoConvention convention() const { return convention_; }
    [[nodiscard]] const std::vector<QuantoQuote>& quotes() const { return quotes_; }
    [[nodiscard]] std::size_t size() const { return quotes_.size(); }

private:
    QuantoConvention convention_ = QuantoConvention::Gamma;
    std::vector<QuantoQuote> quotes_;
};

}  // namespace qlc
