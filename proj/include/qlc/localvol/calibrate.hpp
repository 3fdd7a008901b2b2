#pragma once

#include <algorithm>
#include <limits>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "qlc/error.hpp"
#include "qlc/localvol/dupire.hpp"
#include "qlc/localvol/surface.hpp"
#include "qlc/marketdata/quotes.hpp"

namespace qlc {

struct CalibrationSettings {
    double tolerance = 1e-4;  // max abs implied-vol error (1 bp)
    int max_iterations = 20;
    bool damping = false;     // halve the skew term after an error increase
    double damping_factor = 0.5;
};

struct CalibrationDiagnostics {
    std::vector<double> max_error;  // one entry per repricing
    int iterations = 0;
    bool converged = false;
    std::string warning;
};

struct CalibrationResult {
    LocalVolSurface surface;
    std::vector<std::vector<double>> model_vols;
    CalibrationDiagnostics diagnostics;
};

namespace detail {

// Strike derivative on a (possibly uneven) node row: central in the
// interior, one-sided at the ends.
inline std::vector<double> strike_derivative(const std::vector<double>& k, const std::vector<double>& v) {
    const std::size_t n = k.size();
    std::vector<double> d(n, 0.0);
    if (n < 2) return d;
    d.front() = (v[1] - v[0]) / (k[1] - k[0]);
    d.back() = (v[n - 1] - v[n - 2]) / (k[n - 1] - k[n - 2]);
    for (std::size_t j = 1; j + 1 < n; ++j) d[j] = (v[j + 1] - v[j - 1]) / (k[j + 1] - k[j - 1]);
    return d;
}

// Difference quotient towards the ATM node. Short-dated implied vol is the
// average of local vol between ATM and the strike, so the node-j local vol
// is pinned by the implied-vol increment over the gap next to it; a central
// stencil cannot see alternating errors and stalls the iteration.
inline std::vector<double> inward_derivative(const std::vector<double>& k, const std::vector<double>& v,
                                             std::size_t atm) {
    std::vector<double> d(k.size(), 0.0);
    for (std::size_t j = 0; j < k.size(); ++j) {
        if (j == atm) continue;
        const std::size_t n = j < atm ? j + 1 : j - 1;
        d[j] = (v[j] - v[n]) / (k[j] - k[n]);
    }
    return d;
}

inline double max_abs_error(const std::vector<std::vector<double>>& model, const VolQuoteSurface& quotes) {
    double e = 0.0;
    for (std::size_t i = 0; i < quotes.size(); ++i) {
        for (std::size_t j = 0; j < quotes[i].vols.size(); ++j) {
            e = std::max(e, std::abs(model[i][j] - quotes[i].vols[j]));
        }
    }
    return e;
}

inline std::string describe(const CalibrationDiagnostics& d) {
    std::ostringstream os;
    os << "iterations=" << d.iterations << " errors=[";
    for (std::size_t i = 0; i < d.max_error.size(); ++i) os << (i ? "," : "") << d.max_error[i];
    os << "]";
    return os.str();
}

}  // namespace detail

/// Fixed-point local-vol calibration on the quote nodes. Starts from the
/// market vols and repeats
///
///   eta_ij <- eta_ij * mkt_atm_i / model_atm_i
///             + 2 (d_k mkt_ij - d_k model_ij) (k_ij - k_i,atm)   for j != atm
///
/// until every model implied vol is within `tolerance` of its quote.
inline CalibrationResult fixed_point_calibrate(const VolQuoteSurface& quotes, const PdeGrid& grid,
                                               const CalibrationSettings& settings = {}) {
    if (!quotes.atm_variance_increasing()) {
        throw CalibrationFailure("calibration precondition: ATM total variance must increase with maturity");
    }
    std::vector<LocalVolSlice> slices;
    for (const auto& s : quotes.slices()) slices.push_back({s.maturity, s.moneyness, s.vols});
    LocalVolSurface surface(slices);

    std::vector<std::vector<double>> mkt_skew;
    for (const auto& s : quotes.slices()) mkt_skew.push_back(detail::inward_derivative(s.moneyness, s.vols, s.atm_index));

    CalibrationResult best{surface, {}, {}};
    double best_error = std::numeric_limits<double>::infinity();
    CalibrationDiagnostics diag;
    int increases = 0;
    bool damp_next = false;

    for (int it = 1; it <= settings.max_iterations; ++it) {
        auto model = dupire_reprice(surface, grid, quotes);
        const double err = detail::max_abs_error(model, quotes);
        diag.max_error.push_back(err);
        diag.iterations = it;
        if (err < best_error) {
            best_error = err;
            best.surface = surface;
            best.model_vols = model;
        }
        if (err < settings.tolerance) {
            diag.converged = true;
            break;
        }
        if (diag.max_error.size() > 1) {
            const bool increased = err > diag.max_error[diag.max_error.size() - 2];
            increases = increased ? increases + 1 : 0;
            damp_next = settings.damping && increased;
            if (increases >= 3) {
                throw CalibrationFailure("local-vol calibration diverged: " + detail::describe(diag));
            }
        }
        if (it == settings.max_iterations) break;

        std::vector<std::vector<double>> next(quotes.size());
        for (std::size_t i = 0; i < quotes.size(); ++i) {
            const auto& q = quotes[i];
            const auto& eta = surface.slices()[i].values;
            const auto model_skew = detail::inward_derivative(q.moneyness, model[i], q.atm_index);
            const auto& mskew = mkt_skew[i];
            const double level = q.atm_vol() / model[i][q.atm_index];
            const double skew_weight = damp_next ? settings.damping_factor : 1.0;
            next[i].resize(eta.size());
            for (std::size_t j = 0; j < eta.size(); ++j) {
                double v = eta[j] * level;
                if (j != q.atm_index) {
                    const double dk = q.moneyness[j] - q.moneyness[q.atm_index];
                    v += skew_weight * 2.0 * (mskew[j] - model_skew[j]) * dk;
                }
                // keep nodes positive if a wing correction overshoots
                next[i][j] = std::max(v, 0.25 * eta[j]);
            }
        }
        surface = surface.with_values(next);
    }

    diag.iterations = static_cast<int>(diag.max_error.size());
    if (!diag.converged) {
        diag.warning = "max_iter reached; returning best surface with max error " + std::to_string(best_error);
    }
    best.diagnostics = diag;
    return best;
}

}  // namespace qlc
