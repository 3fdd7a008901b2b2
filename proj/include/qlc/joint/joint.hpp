#pragma once

// Experimental: joint calibration to quanto corrections and composite
// options. Not used by any default pipeline.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "qlc/error.hpp"
#include "qlc/format.hpp"
#include "qlc/math/summation.hpp"
#include "qlc/mc/correlation.hpp"
#include "qlc/mc/engine.hpp"
#include "qlc/mc/kernel.hpp"

namespace qlc::joint {

/// theta_z(t, z) = 1/2 E[phi^2 - eta^2 - psi^2 | z] at every path.
inline std::vector<double> theta_z(const LocalVolSurface& phi, double t, std::span<const double> z,
                                   const mc::KernelSmoother& kernel, std::span<const double> eta,
                                   std::span<const double> psi, unsigned workers, mc::ClipStats& stats) {
    auto gap = mc::composite_gap(phi, t, z, kernel, eta, psi, workers, stats);
    for (double& g : gap) g *= 0.5;
    return gap;
}

struct KappaEstimate {
    double value = 0.0;
    double std_error = 0.0;
};

/// kappa(t) = d/dt q + E[s theta_z] over the cross-section.
inline KappaEstimate kappa(const QuantoMark& mark, double t, std::span<const double> s,
                           std::span<const double> theta) {
    std::vector<double> w(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) w[i] = s[i] * theta[i];
    const auto m = math::moments(w);
    return {mark.dq(t) + m.mean, m.std_error};
}

/// Gaussian product-kernel density of (log s, log x) on a binned grid,
/// bandwidth per coordinate as in the particle regression.
class JointDensity {
public:
    JointDensity(std::span<const double> ls, std::span<const double> lx, const mc::KernelSpec& spec,
                 std::size_t grid = 128)
        : g_(grid) {
        const std::size_t n = ls.size();
        auto setup = [&](std::span<const double> u, double& lo, double& du, double& h, std::vector<double>& k) {
            const auto m = math::moments(u);
            const auto [a, b] = std::minmax_element(u.begin(), u.end());
            lo = *a;
            du = std::max(*b - *a, 1e-12) / static_cast<double>(g_ - 1);
            h = std::max(spec.c * std::sqrt(m.variance) * std::pow(static_cast<double>(n), -0.2), du);
            const auto reach = static_cast<std::size_t>(std::ceil(spec.cutoff * h / du));
            k.resize(reach + 1);
            for (std::size_t d = 0; d <= reach; ++d) {
                const double z = static_cast<double>(d) * du / h;
                k[d] = std::exp(-0.5 * z * z) / (h * std::sqrt(2.0 * std::numbers::pi));
            }
        };
        setup(ls, lo_s_, du_s_, h_s_, ks_);
        setup(lx, lo_x_, du_x_, h_x_, kx_);
        std::vector<double> bins(g_ * g_, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto [a, fa] = locate(ls[i], lo_s_, du_s_);
            const auto [b, fb] = locate(lx[i], lo_x_, du_x_);
            bins[a * g_ + b] += (1 - fa) * (1 - fb);
            bins[(a + 1) * g_ + b] += fa * (1 - fb);
            bins[a * g_ + b + 1] += (1 - fa) * fb;
            bins[(a + 1) * g_ + b + 1] += fa * fb;
        }
        // separable smoothing: along x, then along s
        std::vector<double> tmp(g_ * g_, 0.0);
        const auto rx = kx_.size() - 1, rs = ks_.size() - 1;
        for (std::size_t a = 0; a < g_; ++a) {
            for (std::size_t b = 0; b < g_; ++b) {
                double acc = 0.0;
                for (std::size_t c = b > rx ? b - rx : 0; c <= std::min(g_ - 1, b + rx); ++c) {
                    acc += kx_[c > b ? c - b : b - c] * bins[a * g_ + c];
                }
                tmp[a * g_ + b] = acc;
            }
        }
        density_.assign(g_ * g_, 0.0);
        const double inv_n = 1.0 / static_cast<double>(n);
        for (std::size_t a = 0; a < g_; ++a) {
            for (std::size_t b = 0; b < g_; ++b) {
                double acc = 0.0;
                for (std::size_t c = a > rs ? a - rs : 0; c <= std::min(g_ - 1, a + rs); ++c) {
                    acc += ks_[c > a ? c - a : a - c] * tmp[c * g_ + b];
                }
                density_[a * g_ + b] = acc * inv_n;
            }
        }
        mode_ = *std::max_element(density_.begin(), density_.end());
    }

    /// Density of (log s, log x).
    [[nodiscard]] double log_density(double ls, double lx) const {
        const auto [a, fa] = locate(ls, lo_s_, du_s_);
        const auto [b, fb] = locate(lx, lo_x_, du_x_);
        return (1 - fa) * (1 - fb) * density_[a * g_ + b] + fa * (1 - fb) * density_[(a + 1) * g_ + b] +
               (1 - fa) * fb * density_[a * g_ + b + 1] + fa * fb * density_[(a + 1) * g_ + b + 1];
    }

    /// Density of (s, x): the log-coordinate density over s x.
    [[nodiscard]] double operator()(double s, double x) const { return log_density(std::log(s), std::log(x)) / (s * x); }

    [[nodiscard]] double mode() const { return mode_; }

private:
    [[nodiscard]] std::pair<std::size_t, double> locate(double u, double lo, double du) const {
        const double p = std::clamp((u - lo) / du, 0.0, static_cast<double>(g_ - 1));
        auto i = std::min(static_cast<std::size_t>(p), g_ - 2);
        return {i, p - static_cast<double>(i)};
    }

    std::size_t g_;
    double lo_s_ = 0, du_s_ = 1, h_s_ = 1, lo_x_ = 0, du_x_ = 1, h_x_ = 1;
    std::vector<double> ks_, kx_, density_;
    double mode_ = 0.0;
};

struct ThetaR {
    std::vector<double> values;
    std::size_t flagged = 0;  // paths where theta_r could not be formed and was set to 0
};

/// theta_r = c(t) (g - E[g | z]) with the shape g = (1 - s) e^{-s} / p(s, z),
/// p the joint density of (s, z = s x). The conditional mean is removed
/// by kernel regression on log z, so E[theta_r | z] = 0 holds on the
/// simulated cross-section; the shape alone only integrates to zero over
/// all s > 0, most of which a finite sample never reaches. c is fixed so
/// that the sample average of s theta_r equals -kappa exactly. Paths in the
/// density tail (below floor times the mode of the log-coordinate density)
/// or outside the regression's supported span get 0 and are flagged.
inline ThetaR theta_r(std::span<const double> s, std::span<const double> x, double kappa_value,
                      const JointDensity& density, double floor = 1e-8, const mc::KernelSpec& spec = {}) {
    const std::size_t n = s.size();
    ThetaR out;
    out.values.assign(n, 0.0);
    if (kappa_value == 0.0) return out;
    std::vector<double> u(n), g(n, 0.0), in(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        u[i] = std::log(s[i] * x[i]);
        const double pl = density.log_density(std::log(s[i]), std::log(x[i]));
        if (!(pl > floor * density.mode())) continue;
        // p(s, z) = p_log(log s, log x) / (s^2 x)
        g[i] = (1.0 - s[i]) * std::exp(-s[i]) * s[i] * s[i] * x[i] / pl;
        in[i] = 1.0;
    }
    const mc::KernelSmoother kernel(u, spec);
    const auto mg = kernel.smooth(g);
    const auto mi = kernel.smooth(in);
    std::vector<double> h(n, 0.0), sh(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double w = kernel.at(mi, u[i]);
        if (in[i] == 0.0 || kernel.thin(u[i]) || !(w > 0.0)) {
            ++out.flagged;
            continue;
        }
        // E[g | z] among the unflagged paths, so flagged zeros do not bias it
        h[i] = g[i] - kernel.at(mg, u[i]) / w;
        sh[i] = s[i] * h[i];
    }
    const double norm = math::mean(sh);
    if (norm == 0.0) {
        // unspread cross-section (s == 1 everywhere): the shape vanishes on every path
        out.flagged = n;
        return out;
    }
    for (std::size_t i = 0; i < n; ++i) out.values[i] = -kappa_value * h[i] / norm;
    return out;
}

struct JointStep {
    double time = 0.0;
    double kappa = 0.0;
    double kappa_se = 0.0;
    double clip_fraction = 0.0;
    std::size_t flagged_paths = 0;
};

struct JointOptions {
    bool zero_kappa = false;  // drop theta_r: the composite (LV2) correlation
    double density_floor = 1e-8;
    std::size_t density_grid = 128;
};

/// Correlation over one step. The z-part of theta is theta_z scaled by
/// eta psi / E[eta psi | z], which keeps E[theta | z] = theta_z while making
/// the zero-remainder case coincide with the LV2 correlation; kappa is
/// measured with the same scaled term.
inline mc::CorrelationField joint_correlation(const mc::SimState& st, double t, const QuantoMark& mark,
                                              const LocalVolSurface& phi, std::span<const double> eta,
                                              std::span<const double> psi, const mc::KernelSpec& spec,
                                              double eps_vol, unsigned workers, const JointOptions& opt,
                                              JointStep& diag) {
    const std::size_t n = st.size();
    std::vector<double> z(n), u(n), den(n), ls(n), lx(n);
    for (std::size_t i = 0; i < n; ++i) {
        z[i] = st.s[i] * st.x[i];
        u[i] = std::log(z[i]);
        den[i] = eta[i] * psi[i];
        ls[i] = std::log(st.s[i]);
        lx[i] = std::log(st.x[i]);
    }
    mc::CorrelationField f;
    f.strategy = mc::Strategy::LV2;
    f.scalar = false;
    const mc::KernelSmoother kernel(u, spec);
    const auto gap = mc::composite_gap(phi, t, z, kernel, eta, psi, workers, f.stats);
    const auto cond = kernel.smooth(den);
    const double floor = eps_vol * eps_vol;
    std::vector<double> d(n), lifted(n);
    for (std::size_t i = 0; i < n; ++i) {
        d[i] = kernel.at(cond, u[i]);
        if (d[i] < floor) {
            ++f.stats.floored;
            d[i] = floor;
        }
        lifted[i] = (0.5 * gap[i]) / d[i] * den[i];
    }
    // dq at the cross-section's own time, so E[s] and q refer to the same date
    const auto k = kappa(mark, st.time, st.s, lifted);
    diag.time = st.time;
    diag.kappa = k.value;
    diag.kappa_se = k.std_error;
    ThetaR r;
    if (!opt.zero_kappa) {
        const JointDensity density(ls, lx, spec, opt.density_grid);
        r = theta_r(st.s, st.x, k.value, density, opt.density_floor, spec);
    } else {
        r.values.assign(n, 0.0);
    }
    diag.flagged_paths = r.flagged;
    f.per_path.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double rest = 0.0;
        if (r.values[i] != 0.0) rest = r.values[i] / std::max(den[i], floor);
        f.per_path[i] = mc::clip_rho((0.5 * gap[i]) / d[i] + rest, f.stats);
    }
    f.std_error = math::moments(f.per_path).std_error;
    diag.clip_fraction = f.stats.clip_fraction();
    return f;
}

struct JointResult {
    mc::SimResult sim;
    std::vector<JointStep> steps;
};

/// Simulation under the joint correlation. Needs a quanto mark and phi.
inline JointResult simulate_joint(const mc::SimConfig& cfg, const mc::SimInputs& in, const JointOptions& opt = {}) {
    if (!in.mark || !in.phi) throw ConfigError("joint calibration needs a quanto mark and a composite surface");
    auto c = cfg;
    c.strategy = mc::Strategy::LV2;
    const mc::Engine engine(c, in);
    const auto times = mc::time_grid(engine.config(), in);
    const std::size_t n = c.n_paths;
    mc::SimState state(n);
    JointResult out;
    out.sim.strategy = mc::Strategy::LV2;
    out.sim.n_paths = n;
    out.sim.seed = c.seed;
    out.sim.observation_times = engine.config().observation_times;
    std::size_t next_obs = 0;
    std::vector<double> eta(n), psi(n), as(n), ax(n);
    for (std::size_t step = 0; step + 1 < times.size(); ++step) {
        const double t0 = times[step], t1 = times[step + 1], tm = 0.5 * (t0 + t1);
        state.time = t0;
        engine.effective_vols(state, tm, eta, psi, as, ax);
        JointStep diag;
        auto field = joint_correlation(state, tm, *in.mark, *in.phi, eta, psi, c.kernel, c.eps_vol, engine.workers(),
                                       opt, diag);
        engine.advance(state, static_cast<std::uint32_t>(step), t1 - t0, field, as, ax);
        state.time = t1;
        out.steps.push_back(diag);
        out.sim.history.push_back({t0, t1 - t0, field.mean(), field.std_error, field.stats});
        while (next_obs < out.sim.observation_times.size() &&
               std::abs(out.sim.observation_times[next_obs] - t1) <= 1e-10) {
            out.sim.s.push_back(state.s);
            out.sim.x.push_back(state.x);
            ++next_obs;
        }
    }
    return out;
}

inline void write_joint_csv(const std::vector<JointStep>& steps, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw LoadError("cannot write " + path.string());
    out << "time_yf,kappa,kappa_se,clip_fraction,flagged_paths\n";
    for (const auto& s : steps) {
        out << format_sig(s.time) << ',' << format_sig(s.kappa) << ',' << format_sig(s.kappa_se) << ','
            << format_sig(s.clip_fraction) << ',' << s.flagged_paths << '\n';
    }
}

}  // namespace qlc::joint
