#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "qlc/error.hpp"

namespace qlc {

/// Deterministic discount curve; log-discount factors interpolate linearly
/// in time, so the instantaneous rate is flat between and beyond pillars.
class DiscountCurve {
public:
    DiscountCurve() = default;

    DiscountCurve(std::string currency, std::vector<double> times, std::vector<double> dfs)
        : currency_(std::move(currency)) {
        if (times.size() != dfs.size()) throw InvalidInput("discount curve: size mismatch");
        times_.push_back(0.0);
        log_df_.push_back(0.0);
        for (std::size_t i = 0; i < times.size(); ++i) {
            if (!std::isfinite(times[i]) || !std::isfinite(dfs[i])) {
                throw InvalidInput("discount curve: non-finite pillar " + std::to_string(i));
            }
            if (times[i] == 0.0) {
                if (std::abs(dfs[i] - 1.0) > 1e-12) throw InvalidInput("discount curve: df(0) must equal 1");
                continue;
            }
            if (!(times[i] > times_.back())) {
                throw InvalidInput("discount curve: times must be strictly increasing and positive");
            }
            if (!(dfs[i] > 0.0)) throw InvalidInput("discount curve: discount factors must be positive");
            times_.push_back(times[i]);
            log_df_.push_back(std::log(dfs[i]));
        }
    }

    /// Flat continuously-compounded rate curve.
    static DiscountCurve flat(std::string currency, double rate, double horizon = 50.0) {
        return DiscountCurve(std::move(currency), {horizon}, {std::exp(-rate * horizon)});
    }

    [[nodiscard]] double df(double t) const {
        if (t <= 0.0 || times_.size() == 1) return 1.0;
        return std::exp(log_df_at(t));
    }

    [[nodiscard]] const std::string& currency() const { return currency_; }
    [[nodiscard]] const std::vector<double>& times() const { return times_; }

private:
    [[nodiscard]] double log_df_at(double t) const {
        auto it = std::upper_bound(times_.begin(), times_.end(), t);
        std::size_t i = static_cast<std::size_t>(it - times_.begin());
        if (i >= times_.size()) i = times_.size() - 1;
        const double t0 = times_[i - 1], t1 = times_[i];
        const double w = (t - t0) / (t1 - t0);
        return log_df_[i - 1] + w * (log_df_[i] - log_df_[i - 1]);
    }

    std::string currency_;
    std::vector<double> times_;
    std::vector<double> log_df_;
};

/// Forward curve with spot at t = 0; log-forwards interpolate linearly and
/// the last segment's growth rate continues beyond the last pillar.
class ForwardCurve {
public:
    ForwardCurve() = default;

    ForwardCurve(double spot, std::vector<double> times, std::vector<double> forwards) {
        if (!(spot > 0.0) || !std::isfinite(spot)) throw InvalidInput("forward curve: spot must be positive");
        if (times.size() != forwards.size()) throw InvalidInput("forward curve: size mismatch");
        times_.push_back(0.0);
        log_fwd_.push_back(std::log(spot));
        for (std::size_t i = 0; i < times.size(); ++i) {
            if (!std::isfinite(times[i]) || !std::isfinite(forwards[i])) {
                throw InvalidInput("forward curve: non-finite pillar " + std::to_string(i));
            }
            if (!(forwards[i] > 0.0)) throw InvalidInput("forward curve: levels must be positive");
            if (times[i] == 0.0) {
                if (std::abs(forwards[i] - spot) > 1e-9 * spot) {
                    throw InvalidInput("forward curve: value at t=0 must equal spot");
                }
                continue;
            }
            if (!(times[i] > times_.back())) throw InvalidInput("forward curve: times must be strictly increasing");
            times_.push_back(times[i]);
            log_fwd_.push_back(std::log(forwards[i]));
        }
    }

    static ForwardCurve flat(double spot) { return ForwardCurve(spot, {}, {}); }

    [[nodiscard]] double spot() const { return std::exp(log_fwd_.front()); }

    [[nodiscard]] double forward(double t) const {
        if (t <= 0.0 || times_.size() == 1) return std::exp(log_fwd_.front());
        auto it = std::upper_bound(times_.begin(), times_.end(), t);
        std::size_t i = static_cast<std::size_t>(it - times_.begin());
        if (i >= times_.size()) i = times_.size() - 1;
        const double t0 = times_[i - 1], t1 = times_[i];
        const double w = (t - t0) / (t1 - t0);
        return std::exp(log_fwd_[i - 1] + w * (log_fwd_[i] - log_fwd_[i - 1]));
    }

    [[nodiscard]] const std::vector<double>& times() const { return times_; }

private:
    std::vector<double> times_;
    std::vector<double> log_fwd_;
};

}  // namespace qlc
