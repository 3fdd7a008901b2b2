#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qlc/error.hpp"
#include "qlc/format.hpp"
#include "qlc/joint/joint.hpp"
#include "qlc/localvol/calibrate.hpp"
#include "qlc/localvol/io.hpp"
#include "qlc/marketdata/snapshot.hpp"
#include "qlc/mc/engine.hpp"
#include "qlc/pricing/pricing.hpp"
#include "qlc/pricing/report.hpp"
#include "qlc/quantomark/mark.hpp"
#include "qlc/slv/leverage.hpp"

// Pipeline stages behind the command-line tool: calibrate, mark, price,
// report, simulate. Every stage writes CSVs with a header row, fixed row
// order and 10 significant digits (surface dumps keep 17 to reload exactly).

namespace qlc::app {

namespace fs = std::filesystem;

struct SlvSettings {
    VarianceSpec asset;
    VarianceSpec fx;
    std::size_t leverage_paths = 100'000;
};

struct RunConfig {
    fs::path manifest;
    fs::path out = "out";
    mc::SimConfig sim;
    std::vector<mc::Strategy> strategies{mc::Strategy::LV};
    std::optional<SlvSettings> slv;
    std::vector<double> report_maturities;  // empty: the quanto pillars
    bool theoretical_quanto_forward = false;  // invert quanto vols against q(T) instead of the sample mean
    std::size_t pde_nodes = 1601;
    CalibrationSettings calibration;
    std::size_t export_paths = 1000;
    bool joint = false;  // simulate: experimental joint correlation instead of the listed strategies
};

namespace detail {

inline VarianceSpec parse_variance(const nlohmann::json& j, const std::string& where) {
    VarianceSpec v;
    try {
        v.kappa = j.value("kappa", v.kappa);
        v.theta = j.value("theta", v.theta);
        v.xi = j.value("xi", v.xi);
        v.v0 = j.value("v0", v.v0);
        v.rho = j.value("rho", v.rho);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(where + ": " + e.what());
    }
    v.validate(where.c_str());
    return v;
}

inline nlohmann::json read_json(const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw LoadError(p.string() + ": cannot open");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw LoadError(p.string() + ": invalid JSON: " + e.what());
    }
}

}  // namespace detail

/// Simulation block: n_paths, steps_per_year, seed, strategy (name or
/// list), clip_policy ("clip" is the only policy), bandwidth_c, eps_vol,
/// observation_times, optional slv {asset, fx, leverage_paths}.
inline void apply_sim_json(const nlohmann::json& j, RunConfig& run) {
    auto& sim = run.sim;
    try {
        sim.n_paths = j.value("n_paths", sim.n_paths);
        sim.steps_per_year = j.value("steps_per_year", sim.steps_per_year);
        sim.seed = j.value("seed", sim.seed);
        sim.eps_vol = j.value("eps_vol", sim.eps_vol);
        sim.kernel.c = j.value("bandwidth_c", sim.kernel.c);
        sim.constant_rho = j.value("constant_rho", sim.constant_rho);
        if (j.contains("observation_times")) sim.observation_times = j["observation_times"].get<std::vector<double>>();
        if (j.contains("strategy")) {
            run.strategies.clear();
            const auto& s = j["strategy"];
            if (s.is_array()) {
                for (const auto& e : s) run.strategies.push_back(mc::parse_strategy(e.get<std::string>()));
            } else {
                run.strategies.push_back(mc::parse_strategy(s.get<std::string>()));
            }
        }
        const auto policy = j.value("clip_policy", std::string("clip"));
        if (policy != "clip") throw ConfigError("simulation: unknown clip_policy '" + policy + "' (only 'clip')");
        if (j.contains("slv")) {
            const auto& s = j["slv"];
            SlvSettings slv;
            if (s.contains("asset")) slv.asset = detail::parse_variance(s["asset"], "slv.asset");
            if (s.contains("fx")) slv.fx = detail::parse_variance(s["fx"], "slv.fx");
            slv.leverage_paths = s.value("leverage_paths", slv.leverage_paths);
            run.slv = slv;
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("simulation config: ") + e.what());
    }
    if (run.strategies.empty()) throw ConfigError("simulation: no strategy");
    sim.validate();
}

/// Run config: {"manifest", "out", "simulation": {...} or "simulation_file",
/// "report": {"maturities", "quanto_forward": "model" | "theoretical"},
/// "calibration": {"tolerance", "max_iterations", "damping", "pde_nodes"},
/// "export_paths"}. Relative paths resolve against the config's directory.
inline RunConfig load_run_config(const fs::path& path) {
    const auto j = detail::read_json(path);
    RunConfig run;
    const auto base = path.parent_path();
    auto resolve = [&](const std::string& p) {
        fs::path q = p;
        return q.is_relative() ? base / q : q;
    };
    try {
        if (j.contains("manifest")) run.manifest = resolve(j["manifest"].get<std::string>());
        if (j.contains("out")) run.out = j["out"].get<std::string>();
        if (j.contains("simulation_file")) apply_sim_json(detail::read_json(resolve(j["simulation_file"].get<std::string>())), run);
        if (j.contains("simulation")) apply_sim_json(j["simulation"], run);
        if (j.contains("report")) {
            const auto& r = j["report"];
            if (r.contains("maturities")) run.report_maturities = r["maturities"].get<std::vector<double>>();
            const auto fwd = r.value("quanto_forward", std::string("model"));
            if (fwd != "model" && fwd != "theoretical") {
                throw ConfigError("report.quanto_forward must be 'model' or 'theoretical'");
            }
            run.theoretical_quanto_forward = fwd == "theoretical";
        }
        if (j.contains("calibration")) {
            const auto& c = j["calibration"];
            run.calibration.tolerance = c.value("tolerance", run.calibration.tolerance);
            run.calibration.max_iterations = c.value("max_iterations", run.calibration.max_iterations);
            run.calibration.damping = c.value("damping", run.calibration.damping);
            run.pde_nodes = c.value("pde_nodes", run.pde_nodes);
        }
        run.export_paths = j.value("export_paths", run.export_paths);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return run;
}

struct Calibrated {
    MarketSnapshot snapshot;
    CalibrationResult asset;
    CalibrationResult fx;
    std::optional<CalibrationResult> composite;
    QuantoMark mark;
    double horizon = 0.0;

    [[nodiscard]] BrokerContext broker(double t) const {
        return {t, snapshot.forward_ratio(t), snapshot.domestic.df(t), snapshot.foreign.df(t), mark.sigma_s(t),
                mark.sigma_x(t)};
    }
};

/// Longest date any stage of this run needs.
inline double run_horizon(const RunConfig& run, const MarketSnapshot& snap) {
    double h = run.sim.end_time();
    for (const auto& q : snap.quanto.quotes()) h = std::max(h, q.maturity);
    for (double t : run.report_maturities) h = std::max(h, t);
    return h;
}

/// Local-vol surfaces for asset, FX and (when quoted) composite, then the
/// quanto mark on the calibrated ATM curves.
inline Calibrated calibrate_all(const RunConfig& run) {
    Calibrated c;
    c.snapshot = load_snapshot(run.manifest);
    c.horizon = run_horizon(run, c.snapshot);
    const auto& snap = c.snapshot;
    const auto grid_a = PdeGrid::covering(snap.asset_vols, run.pde_nodes);
    const auto grid_x = PdeGrid::covering(snap.fx_vols, run.pde_nodes);
    c.asset = fixed_point_calibrate(snap.asset_vols, grid_a, run.calibration);
    c.fx = fixed_point_calibrate(snap.fx_vols, grid_x, run.calibration);
    if (snap.composite_vols) {
        c.composite = fixed_point_calibrate(*snap.composite_vols, PdeGrid::covering(*snap.composite_vols, run.pde_nodes),
                                            run.calibration);
    }
    const auto atm_s = make_atm_curve(c.asset.surface, grid_a, c.horizon);
    const auto atm_x = make_atm_curve(c.fx.surface, grid_x, c.horizon);
    ForwardContext fwd{snap.asset_forward, snap.domestic, snap.foreign};
    MarkSettings ms;
    ms.horizon = c.horizon;
    c.mark = build_mark(snap.quanto, fwd, atm_s, atm_x, ms);
    return c;
}

inline mc::SimInputs make_inputs(const RunConfig& run, const Calibrated& c, bool need_slv) {
    mc::SimInputs in;
    in.eta = c.asset.surface;
    in.psi = c.fx.surface;
    if (c.composite) in.phi = c.composite->surface;
    in.mark = c.mark;
    if (need_slv) {
        if (!run.slv) throw ConfigError("strategies LV3/LV4 need an 'slv' block in the simulation config");
        LeverageConfig lc;
        lc.n_paths = run.slv->leverage_paths;
        lc.steps_per_year = run.sim.steps_per_year;
        lc.horizon = c.horizon;
        lc.seed = run.sim.seed;
        lc.kernel = run.sim.kernel;
        lc.workers = run.sim.workers;
        in.slv = SlvModel{run.slv->asset, run.slv->fx, calibrate_leverage(in.eta, run.slv->asset, lc),
                          calibrate_leverage(in.psi, run.slv->fx, lc)};
    }
    return in;
}

inline bool any_slv(const std::vector<mc::Strategy>& s) {
    return std::any_of(s.begin(), s.end(), [](mc::Strategy x) { return mc::needs_slv(x); });
}

inline void ensure_out(const RunConfig& run) {
    std::error_code ec;
    fs::create_directories(run.out, ec);
    if (ec) throw LoadError("cannot create output directory " + run.out.string() + ": " + ec.message());
}

inline std::ofstream open_csv(const fs::path& p, const std::string& header) {
    std::ofstream out(p);
    if (!out) throw LoadError("cannot write " + p.string());
    out << header << '\n';
    return out;
}

/// Observation times of the run plus the extra dates a stage needs.
inline mc::SimConfig with_observations(mc::SimConfig cfg, const std::vector<double>& extra) {
    auto& obs = cfg.observation_times;
    obs.insert(obs.end(), extra.begin(), extra.end());
    std::sort(obs.begin(), obs.end());
    obs.erase(std::unique(obs.begin(), obs.end(), [](double a, double b) { return std::abs(a - b) <= 1e-10; }), obs.end());
    return cfg;
}

// ---- calibrate / mark-quanto ----

inline void write_mark(const RunConfig& run, const Calibrated& c) {
    save_mark(c.mark, run.out / "mark.csv");
    auto out = open_csv(run.out / "quanto_pillars.csv", "label,maturity_yf,gamma,q,broker_bp");
    for (const auto& q : c.snapshot.quanto.quotes()) {
        const double t = q.maturity;
        out << q.label << ',' << format_sig(t) << ',' << format_sig(c.mark.gamma(t)) << ',' << format_sig(c.mark.q(t)) << ','
            << format_sig(broker_from_gamma(c.mark.gamma(t), c.broker(t)) * 1e4) << '\n';
    }
}

inline void cmd_calibrate(const RunConfig& run) {
    ensure_out(run);
    const auto c = calibrate_all(run);
    save_surface(c.asset.surface, run.out / "asset_lv.csv", "asset");
    save_surface(c.fx.surface, run.out / "fx_lv.csv", "fx");
    if (c.composite) save_surface(c.composite->surface, run.out / "composite_lv.csv", "composite");
    auto rep = open_csv(run.out / "calibration_report.csv", "surface,iterations,max_error_vol,converged,warning");
    auto line = [&](const char* name, const CalibrationResult& r) {
        const auto& d = r.diagnostics;
        rep << name << ',' << d.iterations << ',' << format_sig(d.max_error.empty() ? 0.0 : *std::min_element(d.max_error.begin(), d.max_error.end()))
            << ',' << (d.converged ? "true" : "false") << ',' << d.warning << '\n';
    };
    line("asset", c.asset);
    line("fx", c.fx);
    if (c.composite) line("composite", *c.composite);
    write_mark(run, c);
    if (run.slv && any_slv(run.strategies)) {
        const auto in = make_inputs(run, c, true);
        save_surface(in.slv->asset_leverage.ratio_surface(), run.out / "asset_leverage.csv", "asset_leverage_ratio");
        save_surface(in.slv->fx_leverage.ratio_surface(), run.out / "fx_leverage.csv", "fx_leverage_ratio");
    }
}

inline void cmd_mark_quanto(const RunConfig& run) {
    ensure_out(run);
    write_mark(run, calibrate_all(run));
}

// ---- price ----

struct TableRow {
    std::string label;
    double bid = 0.0, mid = 0.0, ask = 0.0;
    double model = 0.0, ci_halfwidth = 0.0;
};

/// Gamma-package prices (bp) and implied quanto correlations (percent) per
/// pillar for one strategy, from a domestic run and its foreign companion.
struct PriceTables {
    mc::Strategy strategy = mc::Strategy::LV;
    std::vector<TableRow> package_bp;
    std::vector<TableRow> gamma_pct;
    std::vector<PriceResult> raw;  // package per unit spot
};

inline PriceTables price_tables(const RunConfig& run, const Calibrated& c, const mc::SimInputs& in, mc::Strategy s) {
    if (!mc::needs_mark(s) && s != mc::Strategy::Constant) {
        throw ConfigError(std::string("price: strategy ") + mc::to_string(s) + " does not model the quanto drift");
    }
    std::vector<double> pillars;
    for (const auto& q : c.snapshot.quanto.quotes()) pillars.push_back(q.maturity);
    auto cfg = with_observations(run.sim, pillars);
    cfg.strategy = s;
    const auto dom = mc::simulate(cfg, in);
    cfg.measure = mc::Measure::Foreign;
    const auto fgn = mc::simulate(cfg, in);

    PriceTables t;
    t.strategy = s;
    const bool in_bp = c.snapshot.quanto.convention() == QuantoConvention::PriceBp;
    for (const auto& q : c.snapshot.quanto.quotes()) {
        const double T = q.maturity;
        const auto ctx = c.broker(T);
        const auto p = price_gamma_package(dom, fgn, T, ctx.fwd_ratio, ctx.df_dom, ctx.df_for);
        t.raw.push_back(p);
        // quotes in both units; the conversion is decreasing so bid and ask swap
        double pb[3], gb[3];
        const double side[3] = {q.bid, q.mid, q.ask};
        for (int i = 0; i < 3; ++i) {
            pb[i] = in_bp ? side[i] : broker_from_gamma(side[i], ctx) * 1e4;
            gb[i] = in_bp ? gamma_from_broker(side[i] * 1e-4, ctx) : side[i];
        }
        TableRow rp{q.label, std::min(pb[0], pb[2]), pb[1], std::max(pb[0], pb[2]), p.estimate * 1e4, p.ci_halfwidth() * 1e4};
        TableRow rg{q.label, std::min(gb[0], gb[2]) * 100.0, gb[1] * 100.0, std::max(gb[0], gb[2]) * 100.0, 0.0, 0.0};
        try {
            const double g = gamma_from_broker(p.estimate, ctx);
            const double lo = gamma_from_broker(p.ci_low, ctx), hi = gamma_from_broker(p.ci_high, ctx);
            rg.model = g * 100.0;
            rg.ci_halfwidth = 0.5 * std::abs(hi - lo) * 100.0;
        } catch (const NoSolution& e) {
            throw NumericalFailure("price: pillar " + q.label + ": " + e.what());
        }
        t.package_bp.push_back(rp);
        t.gamma_pct.push_back(rg);
    }
    return t;
}

inline void write_table(const fs::path& p, const std::vector<TableRow>& rows) {
    auto out = open_csv(p, "label,bid,mid,ask,model,ci_halfwidth");
    for (const auto& r : rows) {
        out << r.label << ',' << format_sig(r.bid) << ',' << format_sig(r.mid) << ',' << format_sig(r.ask) << ','
            << format_sig(r.model) << ',' << format_sig(r.ci_halfwidth) << '\n';
    }
}

inline void cmd_price(const RunConfig& run) {
    ensure_out(run);
    const auto c = calibrate_all(run);
    const auto in = make_inputs(run, c, any_slv(run.strategies));
    for (auto s : run.strategies) {
        const auto t = price_tables(run, c, in, s);
        write_table(run.out / ("quanto_package_bp_" + std::string(mc::to_string(s)) + ".csv"), t.package_bp);
        write_table(run.out / ("quanto_gamma_pct_" + std::string(mc::to_string(s)) + ".csv"), t.gamma_pct);
    }
}

// ---- report ----

inline std::string maturity_label(const Calibrated& c, double T) {
    for (const auto& q : c.snapshot.quanto.quotes()) {
        if (std::abs(q.maturity - T) <= 1e-10) return q.label;
    }
    return "T" + format_sig(T);
}

inline std::vector<ContractKind> report_kinds(mc::Strategy s) {
    if (s == mc::Strategy::Constant) return {ContractKind::Quanto, ContractKind::Composite};
    if (mc::needs_phi(s)) return {ContractKind::Composite};
    return {ContractKind::Quanto};
}

inline std::vector<SpreadReport> spread_reports(const RunConfig& run, const Calibrated& c, const mc::SimInputs& in,
                                                mc::Strategy s) {
    auto maturities = run.report_maturities;
    if (maturities.empty()) {
        for (const auto& q : c.snapshot.quanto.quotes()) maturities.push_back(q.maturity);
    }
    for (double T : maturities) {
        if (!c.snapshot.asset_vols.find(T)) {
            throw ConfigError("report: maturity " + format_sig(T) + " is not an asset vol pillar");
        }
    }
    auto cfg = with_observations(run.sim, maturities);
    cfg.strategy = s;
    const auto sim = mc::simulate(cfg, in);
    std::vector<SpreadReport> out;
    for (auto kind : report_kinds(s)) {
        for (double T : maturities) {
            const double fwd = kind == ContractKind::Quanto && run.theoretical_quanto_forward ? c.mark.q(T) : 0.0;
            out.push_back(implied_vol_spread_report(sim, c.snapshot.asset_vols, T, kind, maturity_label(c, T), fwd));
        }
    }
    return out;
}

inline void cmd_report(const RunConfig& run) {
    ensure_out(run);
    const auto c = calibrate_all(run);
    const auto in = make_inputs(run, c, any_slv(run.strategies));
    for (auto s : run.strategies) {
        for (const auto& r : spread_reports(run, c, in, s)) {
            write_spread_csv({r}, run.out / ("spread_" + std::string(to_string(r.kind)) + "_" + mc::to_string(s) + "_" +
                                             r.label + ".csv"));
        }
    }
}

// ---- simulate ----

inline void write_paths(const fs::path& p, const mc::SimResult& r, std::size_t count) {
    auto out = open_csv(p, "path_id,time_yf,s,x");
    const std::size_t n = std::min(count, r.n_paths);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < r.observation_times.size(); ++k) {
            out << i << ',' << format_sig(r.observation_times[k]) << ',' << format_sig(r.s[k][i]) << ','
                << format_sig(r.x[k][i]) << '\n';
        }
    }
}

inline void write_history(const fs::path& p, const mc::SimResult& r) {
    auto out = open_csv(p, "time_yf,dt,rho_mean,rho_se,clip_fraction");
    for (const auto& h : r.history) {
        out << format_sig(h.time) << ',' << format_sig(h.dt) << ',' << format_sig(h.rho_mean) << ','
            << format_sig(h.rho_se) << ',' << format_sig(h.stats.clip_fraction()) << '\n';
    }
}

inline void write_forwards(const fs::path& p, const mc::SimResult& r, const QuantoMark& mark) {
    auto out = open_csv(p, "time_yf,mean_s,std_error,q");
    for (std::size_t k = 0; k < r.observation_times.size(); ++k) {
        const auto m = math::moments(r.s[k]);
        out << format_sig(r.observation_times[k]) << ',' << format_sig(m.mean) << ',' << format_sig(m.std_error) << ','
            << format_sig(mark.q(r.observation_times[k])) << '\n';
    }
}

inline void cmd_simulate(const RunConfig& run) {
    ensure_out(run);
    const auto c = calibrate_all(run);
    if (run.joint) {
        const auto in = make_inputs(run, c, false);
        const auto r = joint::simulate_joint(run.sim, in);
        joint::write_joint_csv(r.steps, run.out / "joint_diagnostics.csv");
        write_paths(run.out / "paths_JOINT.csv", r.sim, run.export_paths);
        write_history(run.out / "rho_JOINT.csv", r.sim);
        return;
    }
    const auto in = make_inputs(run, c, any_slv(run.strategies));
    for (auto s : run.strategies) {
        auto cfg = run.sim;
        cfg.strategy = s;
        const auto r = mc::simulate(cfg, in);
        const std::string tag = mc::to_string(s);
        write_paths(run.out / ("paths_" + tag + ".csv"), r, run.export_paths);
        write_history(run.out / ("rho_" + tag + ".csv"), r);
        write_forwards(run.out / ("forward_" + tag + ".csv"), r, c.mark);
    }
}

}  // namespace qlc::app
