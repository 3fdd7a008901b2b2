#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qlc/error.hpp"
#include "qlc/localvol/surface.hpp"
#include "qlc/math/summation.hpp"
#include "qlc/mc/correlation.hpp"
#include "qlc/mc/kernel.hpp"
#include "qlc/mc/parallel.hpp"
#include "qlc/mc/rng.hpp"
#include "qlc/quantomark/mark.hpp"
#include "qlc/slv/model.hpp"

namespace qlc::mc {

// Quanto strategies BS, LV, LC calibrate rho to the quanto correction;
// composite strategies LV2, LC2 to the composite local vol phi. LV3 and
// LV4 are their stochastic-local-vol counterparts. Constant runs a fixed
// rho, which is what the closed-form checks need.
enum class Strategy { BS, LV, LC, LV2, LC2, LV3, LV4, Constant };

inline const char* to_string(Strategy s) {
    switch (s) {
        case Strategy::BS: return "BS";
        case Strategy::LV: return "LV";
        case Strategy::LC: return "LC";
        case Strategy::LV2: return "LV2";
        case Strategy::LC2: return "LC2";
        case Strategy::LV3: return "LV3";
        case Strategy::LV4: return "LV4";
        case Strategy::Constant: return "CONST";
    }
    return "?";
}

inline Strategy parse_strategy(std::string_view name) {
    for (auto s : {Strategy::BS, Strategy::LV, Strategy::LC, Strategy::LV2, Strategy::LC2, Strategy::LV3, Strategy::LV4,
                   Strategy::Constant}) {
        if (name == to_string(s)) return s;
    }
    throw ConfigError("unknown strategy '" + std::string(name) + "' (expected BS, LV, LC, LV2, LC2, LV3, LV4, CONST)");
}

inline bool needs_mark(Strategy s) { return s == Strategy::BS || s == Strategy::LV || s == Strategy::LC || s == Strategy::LV3; }
inline bool needs_phi(Strategy s) { return s == Strategy::LV2 || s == Strategy::LC2 || s == Strategy::LV4; }
inline bool needs_slv(Strategy s) { return s == Strategy::LV3 || s == Strategy::LV4; }
inline bool per_path(Strategy s) { return s == Strategy::LC || s == Strategy::LV2 || s == Strategy::LC2 || s == Strategy::LV4; }

/// Domestic: the asset carries the quanto drift. Foreign: it is a
/// martingale, which is what the foreign-currency legs of the quanto
/// package need.
enum class Measure { Domestic, Foreign };

struct SimConfig {
    std::size_t n_paths = 1'000'000;
    double steps_per_year = 100.0;
    double horizon = 0.0;  // 0: last observation time
    std::uint64_t seed = 20241216;
    Strategy strategy = Strategy::LV;
    KernelSpec kernel;
    double eps_vol = 1e-4;
    std::vector<double> observation_times{1.0};
    double constant_rho = 0.0;
    Measure measure = Measure::Domestic;
    unsigned workers = 0;  // 0: QLC_WORKERS or hardware concurrency

    void validate() const {
        if (n_paths < 1000) throw ConfigError("simulation: n_paths must be at least 1000");
        if (!(steps_per_year >= 12.0)) throw ConfigError("simulation: steps_per_year must be at least 12");
        if (!(eps_vol > 0.0)) throw ConfigError("simulation: eps_vol must be positive");
        if (observation_times.empty()) throw ConfigError("simulation: no observation times");
        for (double t : observation_times) {
            if (!(t > 0.0) || !std::isfinite(t)) throw ConfigError("simulation: observation times must be positive");
        }
        if (!(constant_rho >= -1.0 && constant_rho <= 1.0)) throw ConfigError("simulation: constant rho outside [-1, 1]");
        kernel.validate();
    }

    [[nodiscard]] double end_time() const {
        return std::max(horizon, *std::max_element(observation_times.begin(), observation_times.end()));
    }
};

struct SimInputs {
    LocalVolSurface eta = LocalVolSurface::flat(0.2);  // asset
    LocalVolSurface psi = LocalVolSurface::flat(0.1);  // FX
    std::optional<LocalVolSurface> phi;                // composite
    std::optional<QuantoMark> mark;
    std::optional<SlvModel> slv;
};

/// Cross-section at the current time.
struct SimState {
    double time = 0.0;
    std::vector<double> s, x;    // normalized asset and FX, start at 1
    std::vector<double> vs, vx;  // variances, SLV only

    explicit SimState(std::size_t n, const SlvModel* slv = nullptr) : s(n, 1.0), x(n, 1.0) {
        if (slv) {
            vs.assign(n, slv->asset.v0);
            vx.assign(n, slv->fx.v0);
        }
    }
    [[nodiscard]] std::size_t size() const { return s.size(); }
    [[nodiscard]] bool stochastic_vol() const { return !vs.empty(); }
};

/// Correlation used over one step: a scalar or one value per path.
struct CorrelationField {
    Strategy strategy = Strategy::Constant;
    bool scalar = true;
    double value = 0.0;
    std::vector<double> per_path;
    ClipStats stats;
    double std_error = 0.0;

    [[nodiscard]] double operator[](std::size_t i) const { return scalar ? value : per_path[i]; }

    [[nodiscard]] double mean() const { return scalar ? value : math::mean(per_path); }
};

struct StepRecord {
    double time = 0.0;  // start of the step
    double dt = 0.0;
    double rho_mean = 0.0;
    double rho_se = 0.0;
    ClipStats stats;
};

struct SimResult {
    Strategy strategy = Strategy::Constant;
    Measure measure = Measure::Domestic;
    std::size_t n_paths = 0;
    std::uint64_t seed = 0;
    std::vector<double> observation_times;
    std::vector<std::vector<double>> s, x;  // [observation][path]
    std::vector<StepRecord> history;

    [[nodiscard]] std::size_t observation_index(double t) const {
        for (std::size_t i = 0; i < observation_times.size(); ++i) {
            if (std::abs(observation_times[i] - t) <= 1e-10) return i;
        }
        throw ConfigError("simulation has no observation at t=" + std::to_string(t));
    }

    [[nodiscard]] ClipStats total_stats() const {
        ClipStats c;
        for (const auto& h : history) c += h.stats;
        return c;
    }
};

/// Simulation times: a uniform grid merged with the observation times and
/// the node maturities of the local-vol surfaces, so coefficients stay
/// constant over every step.
inline std::vector<double> time_grid(const SimConfig& cfg, const SimInputs& in) {
    const double end = cfg.end_time();
    const auto n = static_cast<std::size_t>(std::ceil(end * cfg.steps_per_year - 1e-9));
    std::vector<double> t;
    for (std::size_t i = 0; i <= n; ++i) t.push_back(std::min(end, static_cast<double>(i) / cfg.steps_per_year));
    auto add = [&](const std::vector<double>& v) {
        for (double u : v) {
            if (u > 0.0 && u < end) t.push_back(u);
        }
    };
    add(cfg.observation_times);
    add(in.eta.maturities());
    add(in.psi.maturities());
    if (in.phi) add(in.phi->maturities());
    std::sort(t.begin(), t.end());
    std::vector<double> out;
    for (double u : t) {
        if (out.empty() || u - out.back() > 1e-10) out.push_back(u);
    }
    return out;
}

class Engine {
public:
    Engine(SimConfig cfg, const SimInputs& in) : cfg_(std::move(cfg)), in_(in), rng_(cfg_.seed) {
        cfg_.validate();
        std::sort(cfg_.observation_times.begin(), cfg_.observation_times.end());
        cfg_.observation_times.erase(std::unique(cfg_.observation_times.begin(), cfg_.observation_times.end()),
                                     cfg_.observation_times.end());
        const auto s = cfg_.strategy;
        if (needs_mark(s) && !in_.mark) throw ConfigError(std::string("strategy ") + to_string(s) + " needs a quanto mark");
        if (needs_phi(s) && !in_.phi) throw ConfigError(std::string("strategy ") + to_string(s) + " needs a composite surface");
        if (needs_slv(s) && !in_.slv) throw ConfigError(std::string("strategy ") + to_string(s) + " needs an SLV model");
        if (in_.slv) {
            in_.slv->asset.validate("asset");
            in_.slv->fx.validate("fx");
        }
        workers_ = cfg_.workers ? cfg_.workers : default_workers();
    }

    [[nodiscard]] SimResult run() const {
        const auto times = time_grid(cfg_, in_);
        const std::size_t n = cfg_.n_paths;
        const SlvModel* slv = in_.slv ? &*in_.slv : nullptr;
        SimState state(n, slv);
        SimResult out;
        out.strategy = cfg_.strategy;
        out.measure = cfg_.measure;
        out.n_paths = n;
        out.seed = cfg_.seed;
        out.observation_times = cfg_.observation_times;
        std::size_t next_obs = 0;

        std::vector<double> eta(n), psi(n), as(n), ax(n);
        for (std::size_t step = 0; step + 1 < times.size(); ++step) {
            const double t0 = times[step], t1 = times[step + 1];
            const double dt = t1 - t0;
            const double tm = 0.5 * (t0 + t1);
            state.time = t0;
            effective_vols(state, tm, eta, psi, as, ax);
            auto field = correlation(state, tm, eta, psi, as, ax);
            advance(state, static_cast<std::uint32_t>(step), dt, field, as, ax);
            state.time = t1;
            out.history.push_back({t0, dt, field.mean(), field.std_error, field.stats});
            while (next_obs < cfg_.observation_times.size() && std::abs(cfg_.observation_times[next_obs] - t1) <= 1e-10) {
                out.s.push_back(state.s);
                out.x.push_back(state.x);
                ++next_obs;
            }
        }
        return out;
    }

    /// Local vols and effective vols (leverage times sqrt of variance under
    /// SLV) at the state, for the step centred at tm.
    void effective_vols(const SimState& st, double tm, std::vector<double>& eta, std::vector<double>& psi,
                        std::vector<double>& as, std::vector<double>& ax) const {
        const SlvModel* slv = in_.slv ? &*in_.slv : nullptr;
        parallel_for(st.size(), workers_, [&](std::size_t b, std::size_t e) {
            for (std::size_t i = b; i < e; ++i) {
                eta[i] = in_.eta(tm, st.s[i]);
                psi[i] = in_.psi(tm, st.x[i]);
                if (slv) {
                    as[i] = eta[i] * slv->asset_leverage.ratio(tm, st.s[i]) * std::sqrt(std::max(st.vs[i], 0.0));
                    ax[i] = psi[i] * slv->fx_leverage.ratio(tm, st.x[i]) * std::sqrt(std::max(st.vx[i], 0.0));
                } else {
                    as[i] = eta[i];
                    ax[i] = psi[i];
                }
            }
        });
    }

    [[nodiscard]] CorrelationField correlation(const SimState& st, double tm, std::span<const double> eta,
                                               std::span<const double> psi, std::span<const double> as,
                                               std::span<const double> ax) const {
        CorrelationField f;
        f.strategy = cfg_.strategy;
        const std::size_t n = st.size();
        switch (cfg_.strategy) {
            case Strategy::Constant:
                f.value = clip_rho(cfg_.constant_rho, f.stats);
                break;
            case Strategy::BS:
                f.value = rho_bs(*in_.mark, tm, cfg_.eps_vol, f.stats).value;
                break;
            case Strategy::LV:
            case Strategy::LV3: {
                const auto r = rho_lv(*in_.mark, tm, st.time, st.s, as, ax, cfg_.eps_vol, f.stats);
                f.value = r.value;
                f.std_error = r.std_error;
                break;
            }
            case Strategy::LC: {
                f.scalar = false;
                f.per_path.resize(n);
                const double g = in_.mark->dlog_q(tm);
                std::vector<ClipStats> local(n);
                parallel_for(n, workers_, [&](std::size_t b, std::size_t e) {
                    for (std::size_t i = b; i < e; ++i) f.per_path[i] = rho_lc(g, eta[i], psi[i], cfg_.eps_vol, local[i]);
                });
                for (const auto& l : local) f.stats += l;
                break;
            }
            case Strategy::LC2: {
                f.scalar = false;
                f.per_path.resize(n);
                std::vector<ClipStats> local(n);
                parallel_for(n, workers_, [&](std::size_t b, std::size_t e) {
                    for (std::size_t i = b; i < e; ++i) {
                        const double phi = (*in_.phi)(tm, st.s[i] * st.x[i]);
                        f.per_path[i] = rho_lc2(phi, eta[i], psi[i], cfg_.eps_vol, local[i]);
                    }
                });
                for (const auto& l : local) f.stats += l;
                break;
            }
            case Strategy::LV2:
            case Strategy::LV4: {
                f.scalar = false;
                std::vector<double> z(n), u(n), den(n);
                for (std::size_t i = 0; i < n; ++i) {
                    z[i] = st.s[i] * st.x[i];
                    u[i] = std::log(z[i]);
                    den[i] = cfg_.strategy == Strategy::LV2 ? eta[i] * psi[i] : as[i] * ax[i];
                }
                const KernelSmoother kernel(u, cfg_.kernel);
                const auto gap = composite_gap(*in_.phi, tm, z, kernel, eta, psi, workers_, f.stats);
                f.per_path = rho_composite(gap, z, kernel, den, cfg_.eps_vol, workers_, f.stats);
                break;
            }
        }
        if (!f.scalar) f.std_error = math::moments(f.per_path).std_error;
        return f;
    }

    /// Log-Euler step, exact for coefficients frozen over the step.
    void advance(SimState& st, std::uint32_t step, double dt, const CorrelationField& rho, std::span<const double> as,
                 std::span<const double> ax) const {
        const bool domestic = cfg_.measure == Measure::Domestic;
        const double sq = std::sqrt(dt);
        const SlvModel* slv = in_.slv ? &*in_.slv : nullptr;
        parallel_for(st.size(), workers_, [&](std::size_t b, std::size_t e) {
            for (std::size_t i = b; i < e; ++i) {
                const auto z = rng_.pair(i, step, 0);
                const double r = rho[i];
                const double rc = std::sqrt(std::max(0.0, 1.0 - r * r));
                const double wx = r * z[0] + rc * z[1];
                // foreign numeraire: s loses the quanto drift, x gains a_x^2
                const double drift_s = domestic ? -r * as[i] * ax[i] : 0.0;
                const double drift_x = domestic ? 0.0 : ax[i] * ax[i];
                st.s[i] *= std::exp((drift_s - 0.5 * as[i] * as[i]) * dt + as[i] * sq * z[0]);
                st.x[i] *= std::exp((drift_x - 0.5 * ax[i] * ax[i]) * dt + ax[i] * sq * wx);
                if (slv) {
                    const auto zv = rng_.pair(i, step, 1);
                    st.vs[i] = cir_step(slv->asset, st.vs[i], dt, z[0], zv[0]);
                    st.vx[i] = cir_step(slv->fx, st.vx[i], dt, wx, zv[1]);
                }
                if (!std::isfinite(st.s[i]) || !std::isfinite(st.x[i]) || !(st.s[i] > 0.0) || !(st.x[i] > 0.0)) {
                    throw NumericalFailure("simulation: non-finite or non-positive state on path " + std::to_string(i) +
                                           " at step " + std::to_string(step));
                }
            }
        });
    }

    [[nodiscard]] const SimConfig& config() const { return cfg_; }
    [[nodiscard]] unsigned workers() const { return workers_; }

private:
    // Full truncation: the drift and diffusion see max(v, 0).
    static double cir_step(const VarianceSpec& p, double v, double dt, double w_price, double w_own) {
        const double vp = std::max(v, 0.0);
        const double w = p.rho * w_price + std::sqrt(1.0 - p.rho * p.rho) * w_own;
        return v + p.kappa * (p.theta - vp) * dt + p.xi * std::sqrt(vp * dt) * w;
    }

    SimConfig cfg_;
    const SimInputs& in_;
    NormalStream rng_;
    unsigned workers_ = 1;
};

inline SimResult simulate(const SimConfig& cfg, const SimInputs& in) { return Engine(cfg, in).run(); }

}  // namespace qlc::mc
