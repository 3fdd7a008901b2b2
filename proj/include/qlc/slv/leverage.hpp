#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "qlc/error.hpp"
#include "qlc/localvol/surface.hpp"
#include "qlc/mc/kernel.hpp"
#include "qlc/mc/parallel.hpp"
#include "qlc/mc/rng.hpp"
#include "qlc/slv/model.hpp"

namespace qlc {

struct LeverageConfig {
    std::size_t n_paths = 100'000;
    double steps_per_year = 100.0;
    double horizon = 1.0;
    std::uint64_t seed = 7;
    mc::KernelSpec kernel;
    std::size_t nodes = 41;       // ratio nodes per time slice
    double variance_floor = 1e-8;  // E[v | price] below this is an error
    unsigned workers = 0;
    std::uint32_t stream = 2;     // RNG stream, distinct from the pricing engine's
};

/// Particle calibration of l(t, k) with l^2 E[v | price = k] = eta^2(t, k)
/// for one factor. The factor is simulated driftless (each price is a
/// martingale in its own currency); at every step E[v | log price] comes
/// from kernel regression over the current cross-section and fixes the
/// leverage used over the next step.
inline LeverageSurface calibrate_leverage(const LocalVolSurface& lv, const VarianceSpec& var,
                                          const LeverageConfig& cfg = {}) {
    var.validate("leverage");
    if (cfg.n_paths < 1000 || !(cfg.steps_per_year >= 12.0) || !(cfg.horizon > 0.0) || cfg.nodes < 2) {
        throw ConfigError("leverage calibration: need >= 1000 paths, >= 12 steps/yr, positive horizon, >= 2 nodes");
    }
    const unsigned workers = cfg.workers ? cfg.workers : mc::default_workers();
    std::vector<double> times;
    const auto n_steps = static_cast<std::size_t>(std::ceil(cfg.horizon * cfg.steps_per_year - 1e-9));
    for (std::size_t i = 0; i <= n_steps; ++i) times.push_back(std::min(cfg.horizon, static_cast<double>(i) / cfg.steps_per_year));
    for (double t : lv.maturities()) {
        if (t > 0.0 && t < cfg.horizon) times.push_back(t);
    }
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end(), [](double a, double b) { return b - a <= 1e-10; }), times.end());

    const std::size_t n = cfg.n_paths;
    std::vector<double> s(n, 1.0), v(n, var.v0), u(n), vp(n);
    const mc::NormalStream rng(cfg.seed);
    std::vector<LocalVolSlice> slices;

    for (std::size_t step = 0; step + 1 < times.size(); ++step) {
        const double t0 = times[step], t1 = times[step + 1], dt = t1 - t0, tm = 0.5 * (t0 + t1);
        for (std::size_t i = 0; i < n; ++i) {
            u[i] = std::log(s[i]);
            vp[i] = std::max(v[i], 0.0);
        }
        const mc::KernelSmoother kernel(u, cfg.kernel);
        const auto cond = kernel.smooth(vp);
        LocalVolSlice slice{t1, {}, {}};
        auto add_node = [&](double x) {
            const double e = kernel.at(cond, x);
            if (!(e >= cfg.variance_floor)) {
                throw DegenerateEstimate("leverage calibration: E[v | price] = " + std::to_string(e) + " at t=" +
                                         std::to_string(t0));
            }
            slice.moneyness.push_back(std::exp(x));
            slice.values.push_back(std::sqrt(1.0 / e));
        };
        if (kernel.degenerate()) {
            add_node(0.0);
        } else {
            const double a = kernel.grid_point(kernel.first_supported());
            const double b = kernel.grid_point(kernel.last_supported());
            const std::size_t m = b > a ? cfg.nodes : 1;
            for (std::size_t j = 0; j < m; ++j) add_node(m == 1 ? a : a + (b - a) * static_cast<double>(j) / static_cast<double>(m - 1));
        }
        slices.push_back(slice);
        const math::MonotoneSpline ratio(slice.moneyness, slice.values);

        const double sq = std::sqrt(dt);
        mc::parallel_for(n, workers, [&](std::size_t b, std::size_t e) {
            for (std::size_t i = b; i < e; ++i) {
                const auto z = rng.pair(i, static_cast<std::uint32_t>(step), cfg.stream);
                const double a = lv(tm, s[i]) * ratio(s[i]) * std::sqrt(vp[i]);
                s[i] *= std::exp(-0.5 * a * a * dt + a * sq * z[0]);
                const double w = var.rho * z[0] + std::sqrt(1.0 - var.rho * var.rho) * z[1];
                v[i] = v[i] + var.kappa * (var.theta - vp[i]) * dt + var.xi * std::sqrt(vp[i] * dt) * w;
                if (!std::isfinite(s[i]) || !(s[i] > 0.0)) {
                    throw NumericalFailure("leverage calibration: non-finite path " + std::to_string(i));
                }
            }
        });
    }
    return {lv, LocalVolSurface(std::move(slices))};
}

}  // namespace qlc
