#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "qlc/error.hpp"
#include "qlc/localvol/surface.hpp"
#include "qlc/math/summation.hpp"
#include "qlc/mc/kernel.hpp"
#include "qlc/mc/parallel.hpp"
#include "qlc/quantomark/mark.hpp"

namespace qlc::mc {

/// Counters accumulated while forming correlations.
struct ClipStats {
    std::size_t evaluations = 0;
    std::size_t clipped = 0;
    std::size_t floored = 0;    // denominators evaluated with a floored vol
    std::size_t thin_tail = 0;  // regression queries outside the well-sampled span

    ClipStats& operator+=(const ClipStats& o) {
        evaluations += o.evaluations;
        clipped += o.clipped;
        floored += o.floored;
        thin_tail += o.thin_tail;
        return *this;
    }
    [[nodiscard]] double clip_fraction() const {
        return evaluations ? static_cast<double>(clipped) / static_cast<double>(evaluations) : 0.0;
    }
};

inline double clip_rho(double raw, ClipStats& stats) {
    ++stats.evaluations;
    if (raw > 1.0 || raw < -1.0) {
        ++stats.clipped;
        return raw > 1.0 ? 1.0 : -1.0;
    }
    return raw;
}

/// A correlation common to every path, with its estimation error.
struct ScalarRho {
    double value = 0.0;
    double raw = 0.0;
    double std_error = 0.0;
};

/// -d/dt log q / (sS(t,1) sX(t,1)).
inline ScalarRho rho_bs(const QuantoMark& mark, double t, double eps_vol, ClipStats& stats) {
    const double a = mark.sigma_s(t), b = mark.sigma_x(t);
    if (a < eps_vol || b < eps_vol) {
        throw DegenerateEstimate("rho_BS: ATM vol below floor at t=" + std::to_string(t));
    }
    ScalarRho r;
    r.raw = -mark.dlog_q(t) / (a * b);
    r.value = clip_rho(r.raw, stats);
    return r;
}

/// -d/dt q / E[s a_s a_x] over the current cross-section. With a = local
/// vols this is the time-only local correlation; with SLV effective vols
/// l sqrt(v) it is the stochastic-vol variant. The rate d/dt log q is read
/// at `t` (the step midpoint) but q itself at `t_state`, the time of the
/// cross-section, so that constant coefficients give the BS value exactly.
inline ScalarRho rho_lv(const QuantoMark& mark, double t, double t_state, std::span<const double> s,
                        std::span<const double> a_s, std::span<const double> a_x, double eps_vol, ClipStats& stats) {
    std::vector<double> w(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) w[i] = s[i] * a_s[i] * a_x[i];
    const auto m = math::moments(w);
    const double q = mark.q(t_state);
    if (!(m.mean > eps_vol * q)) {
        throw DegenerateEstimate("rho_LV: E[s eta psi] = " + std::to_string(m.mean) + " below floor at t=" +
                                 std::to_string(t));
    }
    ScalarRho r;
    r.raw = -mark.dlog_q(t) * q / m.mean;
    r.std_error = std::abs(r.raw) * m.std_error / m.mean;
    r.value = clip_rho(r.raw, stats);
    return r;
}

/// Pathwise -d/dt log q / (eta psi); vols below eps are floored and counted.
inline double rho_lc(double dlogq, double eta, double psi, double eps_vol, ClipStats& stats) {
    if (eta < eps_vol || psi < eps_vol) {
        ++stats.floored;
        eta = std::max(eta, eps_vol);
        psi = std::max(psi, eps_vol);
    }
    return clip_rho(-dlogq / (eta * psi), stats);
}

/// Pathwise (phi^2 - eta^2 - psi^2) / (2 eta psi).
inline double rho_lc2(double phi, double eta, double psi, double eps_vol, ClipStats& stats) {
    if (eta < eps_vol || psi < eps_vol) {
        ++stats.floored;
        eta = std::max(eta, eps_vol);
        psi = std::max(psi, eps_vol);
    }
    return clip_rho((phi * phi - eta * eta - psi * psi) / (2.0 * eta * psi), stats);
}

/// phi^2(t, z) - E[eta^2 + psi^2 | z] at every path, the numerator shared by
/// the composite strategies and by the joint calibration.
inline std::vector<double> composite_gap(const LocalVolSurface& phi, double t, std::span<const double> z,
                                         const KernelSmoother& kernel, std::span<const double> eta,
                                         std::span<const double> psi, unsigned workers, ClipStats& stats) {
    const std::size_t n = z.size();
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = eta[i] * eta[i] + psi[i] * psi[i];
    const auto cond = kernel.smooth(v);
    std::vector<double> gap(n);
    std::vector<unsigned char> thin(n, 0);
    parallel_for(n, workers, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            const double u = std::log(z[i]);
            const double f = phi(t, z[i]);
            gap[i] = f * f - kernel.at(cond, u);
            thin[i] = kernel.thin(u) ? 1 : 0;
        }
    });
    for (auto f : thin) stats.thin_tail += f;
    return gap;
}

/// Composite local correlation as a function of (t, z):
/// gap(z) / (2 E[den | z]) with den = eta psi (local vol) or l_s l_x sqrt(v_s v_x) (SLV).
inline std::vector<double> rho_composite(std::span<const double> gap, std::span<const double> z,
                                         const KernelSmoother& kernel, std::span<const double> den, double eps_vol,
                                         unsigned workers, ClipStats& stats) {
    const std::size_t n = z.size();
    const auto cond = kernel.smooth(den);
    std::vector<double> rho(n);
    std::vector<ClipStats> local(n);
    const double floor = eps_vol * eps_vol;
    parallel_for(n, workers, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            double d = kernel.at(cond, std::log(z[i]));
            if (d < floor) {
                ++local[i].floored;
                d = floor;
            }
            rho[i] = clip_rho(gap[i] / (2.0 * d), local[i]);
        }
    });
    for (const auto& l : local) stats += l;
    return rho;
}

}  // namespace qlc::mc
