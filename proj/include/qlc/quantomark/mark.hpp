#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "qlc/error.hpp"
#include "qlc/localvol/dupire.hpp"
#include "qlc/localvol/io.hpp"
#include "qlc/marketdata/curves.hpp"
#include "qlc/marketdata/quotes.hpp"
#include "qlc/math/monotone_spline.hpp"
#include "qlc/quantomark/broker.hpp"

namespace qlc {

/// gamma(t): monotone cubic through the pillars, flat outside them.
class QuantoCorrelationCurve {
public:
    QuantoCorrelationCurve() = default;

    QuantoCorrelationCurve(std::vector<double> times, std::vector<double> gammas) {
        for (std::size_t i = 0; i < gammas.size(); ++i) {
            if (!(gammas[i] >= -1.0 && gammas[i] <= 1.0)) {
                throw InvalidInput("quanto correlation outside [-1, 1] at T=" + std::to_string(times.at(i)));
            }
            if (!(times[i] > 0.0)) throw InvalidInput("quanto correlation pillars need T > 0");
        }
        spline_ = math::MonotoneSpline(std::move(times), std::move(gammas));
    }

    static QuantoCorrelationCurve flat(double gamma) { return QuantoCorrelationCurve({1.0}, {gamma}); }

    [[nodiscard]] double operator()(double t) const { return spline_(t); }
    [[nodiscard]] std::span<const double> times() const { return spline_.nodes(); }
    [[nodiscard]] std::span<const double> values() const { return spline_.values(); }

private:
    math::MonotoneSpline spline_;
};

/// Quanto correlation term structure together with the quanto correction
/// q(t) = exp(-gamma(t) sS(t) sX(t) t) and d/dt log q on a dense cache.
class QuantoMark {
public:
    QuantoMark() = default;

    QuantoMark(QuantoCorrelationCurve gamma, AtmVolCurve atm_s, AtmVolCurve atm_x, double horizon,
               double spacing = 1.0 / 365.0)
        : gamma_(std::move(gamma)), atm_s_(std::move(atm_s)), atm_x_(std::move(atm_x)), h_(spacing) {
        if (!(spacing > 0.0) || !(horizon > 0.0)) throw InvalidInput("quanto mark: need positive horizon and spacing");
        const auto n = static_cast<std::size_t>(std::ceil(horizon / spacing - 1e-9)) + 1;
        n_ = std::max<std::size_t>(n, 3);
        log_q_.resize(n_);
        for (std::size_t i = 0; i < n_; ++i) log_q_[i] = log_q_exact(static_cast<double>(i) * h_);
        dlog_q_.resize(n_);
        // second order everywhere: one-sided stencils at the two ends
        dlog_q_[0] = (-3.0 * log_q_[0] + 4.0 * log_q_[1] - log_q_[2]) / (2.0 * h_);
        for (std::size_t i = 1; i + 1 < n_; ++i) dlog_q_[i] = (log_q_[i + 1] - log_q_[i - 1]) / (2.0 * h_);
        dlog_q_[n_ - 1] = (3.0 * log_q_[n_ - 1] - 4.0 * log_q_[n_ - 2] + log_q_[n_ - 3]) / (2.0 * h_);
    }

    [[nodiscard]] double gamma(double t) const { return gamma_(t); }
    [[nodiscard]] double sigma_s(double t) const { return atm_s_(t); }
    [[nodiscard]] double sigma_x(double t) const { return atm_x_(t); }

    [[nodiscard]] double q(double t) const { return std::exp(log_q_exact(t)); }

    /// d/dt log q, linear between cache nodes, held at the last node beyond.
    [[nodiscard]] double dlog_q(double t) const {
        if (t <= 0.0) return dlog_q_.front();
        const double u = t / h_;
        const auto i = static_cast<std::size_t>(u);
        if (i + 1 >= n_) return dlog_q_.back();
        const double w = u - static_cast<double>(i);
        return dlog_q_[i] + w * (dlog_q_[i + 1] - dlog_q_[i]);
    }

    /// d/dt q.
    [[nodiscard]] double dq(double t) const { return q(t) * dlog_q(t); }

    [[nodiscard]] const QuantoCorrelationCurve& curve() const { return gamma_; }
    [[nodiscard]] double spacing() const { return h_; }
    [[nodiscard]] std::size_t cache_size() const { return n_; }
    [[nodiscard]] double cache_time(std::size_t i) const { return static_cast<double>(i) * h_; }
    [[nodiscard]] const std::vector<double>& cached_log_q() const { return log_q_; }
    [[nodiscard]] const std::vector<double>& cached_dlog_q() const { return dlog_q_; }

private:
    [[nodiscard]] double log_q_exact(double t) const { return -gamma_(t) * atm_s_(t) * atm_x_(t) * t; }

    QuantoCorrelationCurve gamma_;
    AtmVolCurve atm_s_;
    AtmVolCurve atm_x_;
    double h_ = 1.0 / 365.0;
    std::size_t n_ = 0;
    std::vector<double> log_q_;
    std::vector<double> dlog_q_;
};

inline double dlog_q(const QuantoMark& mark, double t) {
    if (t < 0.0) throw InvalidInput("dlog_q: negative time");
    return mark.dlog_q(t);
}

/// Curves needed to convert package prices into correlations.
struct ForwardContext {
    ForwardCurve asset_forward = ForwardCurve::flat(1.0);
    DiscountCurve domestic = DiscountCurve::flat("DOM", 0.0);
    DiscountCurve foreign = DiscountCurve::flat("FOR", 0.0);

    [[nodiscard]] BrokerContext broker(double t, double sigma_s, double sigma_x) const {
        return {t, asset_forward.forward(t) / asset_forward.spot(), domestic.df(t), foreign.df(t), sigma_s, sigma_x};
    }
};

struct MarkSettings {
    QuoteSide side = QuoteSide::Mid;
    double spacing = 1.0 / 365.0;
    double horizon = 0.0;  // 0: last pillar or last ATM-curve time, whichever is later
};

/// Reads gamma at every pillar (converting package prices in bp when
/// needed) and builds the mark.
inline QuantoMark build_mark(const QuantoQuoteSet& quotes, const ForwardContext& fwd, const AtmVolCurve& atm_s,
                             const AtmVolCurve& atm_x, const MarkSettings& settings = {}) {
    std::vector<double> t, g;
    for (const auto& q : quotes.quotes()) {
        double gamma = q.side(settings.side);
        if (quotes.convention() == QuantoConvention::PriceBp) {
            try {
                gamma = gamma_from_broker(gamma * 1e-4, fwd.broker(q.maturity, atm_s(q.maturity), atm_x(q.maturity)));
            } catch (const Error& e) {
                throw CalibrationFailure("quanto pillar " + q.label + ": " + e.what());
            }
        }
        if (!(gamma >= -1.0 && gamma <= 1.0)) {
            throw CalibrationFailure("quanto pillar " + q.label + ": implied correlation " + std::to_string(gamma) +
                                     " outside [-1, 1]");
        }
        t.push_back(q.maturity);
        g.push_back(gamma);
    }
    double horizon = settings.horizon;
    if (horizon <= 0.0) horizon = std::max({t.back(), atm_s.times().back(), atm_x.times().back()});
    return QuantoMark(QuantoCorrelationCurve(t, g), atm_s, atm_x, horizon, settings.spacing);
}

inline void save_mark(const QuantoMark& mark, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw LoadError("cannot write " + path.string());
    out << "time_yf,gamma,q,dlogq\n";
    for (std::size_t i = 0; i < mark.cache_size(); ++i) {
        const double t = mark.cache_time(i);
        out << format_sig(t) << ',' << format_sig(mark.gamma(t)) << ',' << format_sig(std::exp(mark.cached_log_q()[i]))
            << ',' << format_sig(mark.cached_dlog_q()[i]) << '\n';
    }
}

}  // namespace qlc
