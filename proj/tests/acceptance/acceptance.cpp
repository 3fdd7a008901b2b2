// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Reference values are computed here, independently of the
// library code under test.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qlc/app/run.hpp"

namespace fs = std::filesystem;
using namespace qlc;
using mc::Strategy;

namespace {

const fs::path kFixtures = QLC_FIXTURES;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Gamma package from its definition: quanto forward minus plain forward,
// both struck at spot, per unit spot.
double package_reference(double gamma, double ratio, double df_d, double df_f, double ss, double sx, double t) {
    const double q = std::exp(-gamma * ss * sx * t);
    return df_d * (ratio * q - 1.0) - df_f * (ratio - 1.0);
}

app::RunConfig base_run(const std::string& fixture, std::size_t paths) {
    app::RunConfig run;
    run.manifest = kFixtures / fixture / "manifest.json";
    run.sim.n_paths = paths;
    return run;
}

// Inputs for the constant-coefficient fixture taken straight from its quotes.
mc::SimInputs flat_inputs(const MarketSnapshot& snap) {
    auto flat_level = [](const VolQuoteSurface& q) {
        const double v = q[0].vols[0];
        for (const auto& s : q.slices()) {
            for (double x : s.vols) {
                if (x != v) throw InvalidInput("fixture is not flat");
            }
        }
        return v;
    };
    const double ss = flat_level(snap.asset_vols), sx = flat_level(snap.fx_vols);
    mc::SimInputs in;
    in.eta = LocalVolSurface::flat(ss);
    in.psi = LocalVolSurface::flat(sx);
    if (snap.composite_vols) in.phi = LocalVolSurface::flat(flat_level(*snap.composite_vols));
    ForwardContext fwd{snap.asset_forward, snap.domestic, snap.foreign};
    MarkSettings ms;
    ms.horizon = 3.0;
    in.mark = build_mark(snap.quanto, fwd, AtmVolCurve::flat(ss), AtmVolCurve::flat(sx), ms);
    return in;
}

// 1. Local-vol calibration precision on quotes repriced from a known surface.
Outcome local_vol_precision() {
    const std::vector<double> ts{1.0 / 12.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0};
    std::vector<LocalVolSlice> truth_slices;
    std::vector<std::tuple<double, double, double>> layout_rows;
    for (double t : ts) {
        LocalVolSlice s{t, {}, {}};
        for (int j = -4; j <= 4; ++j) {
            const double u = 0.11 * std::sqrt(t) * j;
            s.moneyness.push_back(std::exp(u));
            s.values.push_back(0.2 - 0.3 * u + 0.5 * u * u + 0.01 * t);
            layout_rows.emplace_back(t, std::exp(u), 0.2);
        }
        truth_slices.push_back(s);
    }
    const LocalVolSurface truth(truth_slices);
    const auto layout = VolQuoteSurface::from_rows("synthetic", layout_rows);
    const auto vols = dupire_reprice(truth, PdeGrid::covering(layout), layout);
    std::vector<std::tuple<double, double, double>> rows;
    for (std::size_t i = 0; i < layout.size(); ++i) {
        for (std::size_t j = 0; j < layout[i].moneyness.size(); ++j) rows.emplace_back(ts[i], layout[i].moneyness[j], vols[i][j]);
    }
    const auto quotes = VolQuoteSurface::from_rows("synthetic", rows);

    const auto t0 = std::chrono::steady_clock::now();
    const auto grid = PdeGrid::covering(quotes);
    const auto res = fixed_point_calibrate(quotes, grid);
    const double elapsed = seconds_since(t0);
    const auto model = dupire_reprice(res.surface, grid, quotes);
    double err = 0.0;
    for (std::size_t i = 0; i < quotes.size(); ++i) {
        for (std::size_t j = 0; j < quotes[i].vols.size(); ++j) err = std::max(err, std::abs(model[i][j] - quotes[i].vols[j]));
    }
    return {err < 1e-4 && elapsed < 60.0,
            fmt("%zux%zu quotes, max |err| = %.3g vol (< 1e-4), %d iterations, %.1f s (< 60 s)", quotes.size(),
                quotes[0].vols.size(), err, res.diagnostics.iterations, elapsed)};
}

// 2. Constant-coefficient quanto oracle.
Outcome constant_coefficient_oracle() {
    const auto snap = load_snapshot(kFixtures / "flat" / "manifest.json");
    const auto in = flat_inputs(snap);
    const double target = std::exp(0.3 * 0.2 * 0.1 * 1.0);
    mc::SimConfig cfg;
    cfg.n_paths = 100'000;
    cfg.observation_times = {1.0};
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<mc::SimResult> runs;
    std::string detail;
    bool ok = true;
    for (auto s : {Strategy::BS, Strategy::LV, Strategy::LC}) {
        cfg.strategy = s;
        runs.push_back(mc::simulate(cfg, in));
        const auto m = math::moments(runs.back().s[0]);
        const double z = (m.mean - target) / m.std_error;
        ok = ok && std::abs(z) <= 3.0;
        detail += fmt("%s E[s1] z=%+.2f; ", mc::to_string(s), z);
    }
    const double elapsed = seconds_since(t0);
    double worst = 0.0;
    for (std::size_t a = 0; a < runs.size(); ++a) {
        for (std::size_t b = a + 1; b < runs.size(); ++b) {
            for (std::size_t k = 0; k < runs[a].history.size(); ++k) {
                const auto& ha = runs[a].history[k];
                const auto& hb = runs[b].history[k];
                const double se = std::hypot(ha.rho_se, hb.rho_se);
                const double d = std::abs(ha.rho_mean - hb.rho_mean);
                // exact-arithmetic equality: allow only last-digit roundoff when both SEs vanish
                const double ratio = d <= 1e-12 ? 0.0 : d / se;
                worst = std::max(worst, ratio);
            }
        }
    }
    ok = ok && worst <= 2.0 && elapsed < 30.0;
    detail += fmt("rho histories max |diff|/SE = %.2f (<= 2); %.1f s (< 30 s)", worst, elapsed);
    return {ok, detail};
}

// 3. Quanto-pillar fidelity on the smiled fixture.
Outcome quanto_pillars() {
    auto run = base_run("smiled", 100'000);
    const auto c = app::calibrate_all(run);
    const auto in = app::make_inputs(run, c, false);
    bool ok = true;
    std::string detail;
    for (auto s : {Strategy::LV, Strategy::LC}) {
        const auto t = app::price_tables(run, c, in, s);
        detail += std::string(mc::to_string(s)) + ":";
        for (std::size_t i = 0; i < t.raw.size(); ++i) {
            const double mid = c.snapshot.quanto.quotes()[i].mid * 1e-4;  // quoted in bp
            const auto& p = t.raw[i];
            const double d = (p.estimate - mid) / p.ci_halfwidth();
            ok = ok && std::abs(d) <= 1.0;
            detail += fmt(" %s %+.2f", c.snapshot.quanto.quotes()[i].label.c_str(), d);
        }
        detail += "; ";
    }
    detail += "(model - mid) / 95% half-width, each within [-1, 1]";
    return {ok, detail};
}

// 4. Flat smiles give no quanto spread.
Outcome flat_quanto_spread() {
    const auto snap = load_snapshot(kFixtures / "flat" / "manifest.json");
    const auto in = flat_inputs(snap);
    mc::SimConfig cfg;
    cfg.n_paths = 100'000;
    std::vector<double> mats;
    for (const auto& s : snap.asset_vols.slices()) mats.push_back(s.maturity);
    cfg.observation_times = mats;
    bool ok = true;
    double worst = 0.0;
    std::size_t nodes = 0;
    for (auto s : {Strategy::BS, Strategy::LV, Strategy::LC}) {
        cfg.strategy = s;
        const auto sim = mc::simulate(cfg, in);
        for (double T : mats) {
            const auto rep = implied_vol_spread_report(sim, snap.asset_vols, T, ContractKind::Quanto);
            for (const auto& p : rep.points) {
                const double tol = std::max(3.0 * p.model_vol_se * 1e4, 2.0);
                const bool node_ok = std::isfinite(p.spread) && std::abs(p.spread) < tol;
                ok = ok && node_ok;
                worst = std::max(worst, std::isfinite(p.spread) ? std::abs(p.spread) / tol : 1e9);
                ++nodes;
            }
        }
    }
    return {ok, fmt("%zu nodes (BS, LV, LC), max |spread| / max(3 SE, 2 bp) = %.2f (< 1)", nodes, worst)};
}

// 5. Composite closed form.
Outcome composite_closed_form() {
    auto run = base_run("flat", 100'000);
    const auto c = app::calibrate_all(run);
    auto in = flat_inputs(c.snapshot);
    in.phi = c.composite->surface;  // calibrated from the composite quotes
    const double target = std::sqrt(0.2 * 0.2 + 0.1 * 0.1 + 2.0 * -0.3 * 0.2 * 0.1);
    mc::SimConfig cfg;
    cfg.n_paths = 100'000;
    cfg.observation_times = {0.5, 1.0, 2.0};
    cfg.constant_rho = -0.3;
    bool ok = true;
    std::string detail;
    for (auto s : {Strategy::LC2, Strategy::Constant}) {
        cfg.strategy = s;
        const auto sim = mc::simulate(cfg, in);
        double worst = 0.0;
        for (double T : cfg.observation_times) {
            const auto& obs = sim.observation_index(T);
            std::vector<double> z(sim.s[obs]);
            for (std::size_t i = 0; i < z.size(); ++i) z[i] *= sim.x[obs][i];
            for (double k : {0.8, 0.9, 1.0, 1.1, 1.2}) {
                const auto iv = mc_implied_vol(z, T, k, 1.0, false);
                const double tol = std::max(3.0 * iv.std_error, 10e-4);
                const double r = iv.ok() ? std::abs(iv.vol - target) / tol : 1e9;
                ok = ok && r < 1.0;
                worst = std::max(worst, r);
            }
        }
        detail += fmt("%s max |vol - %.5f| / max(3 SE, 10 bp) = %.2f; ", mc::to_string(s), target, worst);
    }
    return {ok, detail};
}

// 6. Broker conversion round trip and companion-simulation package.
Outcome broker_round_trip() {
    std::mt19937_64 gen(12345);
    std::uniform_real_distribution<double> g(-0.95, 0.95), t(0.05, 10.0), r(0.7, 1.4), df(0.6, 1.0), vs(0.05, 0.6),
        vx(0.03, 0.3);
    double worst = 0.0, worst_ref = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const BrokerContext ctx{t(gen), r(gen), df(gen), df(gen), vs(gen), vx(gen)};
        const double gamma = g(gen);
        const double pkg = broker_from_gamma(gamma, ctx);
        worst = std::max(worst, std::abs(gamma_from_broker(pkg, ctx) - gamma));
        const double ref = package_reference(gamma, ctx.fwd_ratio, ctx.df_dom, ctx.df_for, ctx.sigma_s, ctx.sigma_x, ctx.maturity);
        worst_ref = std::max(worst_ref, std::abs(pkg - ref));
    }
    const auto snap = load_snapshot(kFixtures / "flat" / "manifest.json");
    const auto in = flat_inputs(snap);
    mc::SimConfig cfg;
    cfg.n_paths = 100'000;
    cfg.observation_times = {1.0};
    cfg.strategy = Strategy::LC;
    const auto dom = mc::simulate(cfg, in);
    cfg.measure = mc::Measure::Foreign;
    const auto fgn = mc::simulate(cfg, in);
    const double T = 1.0;
    const BrokerContext ctx{T, snap.forward_ratio(T), snap.domestic.df(T), snap.foreign.df(T), 0.2, 0.1};
    const auto p = price_gamma_package(dom, fgn, T, ctx.fwd_ratio, ctx.df_dom, ctx.df_for);
    const double expect = package_reference(-0.3, ctx.fwd_ratio, ctx.df_dom, ctx.df_for, 0.2, 0.1, T);
    const double z = (p.estimate - expect) / p.std_error;
    const bool ok = worst <= 1e-12 && worst_ref <= 1e-14 && std::abs(z) <= 3.0;
    return {ok, fmt("round trip max |err| = %.2g (<= 1e-12), vs definition %.2g; package %.4f bp vs %.4f bp, z=%+.2f (<= 3)",
                    worst, worst_ref, p.estimate * 1e4, expect * 1e4, z)};
}

// 7. Composite fidelity with a calibrated composite surface.
Outcome composite_fidelity() {
    auto run = base_run("smiled", 100'000);
    const auto c = app::calibrate_all(run);
    const auto in = app::make_inputs(run, c, false);
    const auto& quotes = *c.snapshot.composite_vols;
    const auto& phi_vols = c.composite->model_vols;  // what phi itself implies at the nodes
    mc::SimConfig cfg;
    cfg.n_paths = 100'000;
    cfg.observation_times.clear();
    for (const auto& s : quotes.slices()) cfg.observation_times.push_back(s.maturity);
    bool ok = true;
    std::string detail;
    for (auto s : {Strategy::LV2, Strategy::LC2}) {
        cfg.strategy = s;
        const auto sim = mc::simulate(cfg, in);
        double worst = 0.0;
        std::size_t nodes = 0;
        for (std::size_t i = 0; i < quotes.size(); ++i) {
            const double T = quotes[i].maturity;
            const auto obs = sim.observation_index(T);
            std::vector<double> z(sim.s[obs]);
            for (std::size_t p = 0; p < z.size(); ++p) z[p] *= sim.x[obs][p];
            for (std::size_t j = 0; j < quotes[i].moneyness.size(); ++j) {
                const auto iv = mc_implied_vol(z, T, quotes[i].moneyness[j], 1.0, false);
                const double tol = std::max(3.0 * iv.std_error, 10e-4);
                const double r = iv.ok() ? std::abs(iv.vol - phi_vols[i][j]) / tol : 1e9;
                ok = ok && r < 1.0;
                worst = std::max(worst, r);
                ++nodes;
            }
        }
        detail += fmt("%s %zu nodes, max |err| / max(3 SE, 10 bp) = %.2f, clip %.2g; ", mc::to_string(s), nodes, worst,
                      sim.total_stats().clip_fraction());
    }
    return {ok, detail};
}

// 8. SLV degeneracy and fidelity.
Outcome slv() {
    auto run = base_run("smiled", 100'000);
    run.sim.observation_times = {1.0};
    const auto c = app::calibrate_all(run);
    auto in = app::make_inputs(run, c, false);

    // unit deterministic variance: SLV reduces to LV
    VarianceSpec unit;
    LeverageConfig lc;
    lc.n_paths = 20'000;
    lc.horizon = 1.0;
    in.slv = SlvModel{unit, unit, calibrate_leverage(in.eta, unit, lc), calibrate_leverage(in.psi, unit, lc)};
    mc::SimConfig cfg;
    cfg.n_paths = 100'000;
    cfg.observation_times = {0.5, 1.0};
    double diff = 0.0;
    for (auto [a, b] : {std::pair{Strategy::LV3, Strategy::LV}, std::pair{Strategy::LV4, Strategy::LV2}}) {
        cfg.strategy = a;
        const auto ra = mc::simulate(cfg, in);
        cfg.strategy = b;
        const auto rb = mc::simulate(cfg, in);
        for (std::size_t k = 0; k < ra.s.size(); ++k) {
            for (std::size_t i = 0; i < ra.s[k].size(); ++i) {
                diff = std::max({diff, std::abs(ra.s[k][i] - rb.s[k][i]), std::abs(ra.x[k][i] - rb.x[k][i])});
            }
        }
        for (std::size_t k = 0; k < ra.history.size(); ++k) diff = std::max(diff, std::abs(ra.history[k].rho_mean - rb.history[k].rho_mean));
    }

    // CIR variance, Feller satisfied
    VarianceSpec cir;
    cir.kappa = 2.0;
    cir.theta = 1.0;
    cir.xi = 0.5;
    cir.v0 = 1.0;
    cir.rho = -0.5;
    lc.n_paths = 100'000;
    in.slv = SlvModel{cir, cir, calibrate_leverage(in.eta, cir, lc), calibrate_leverage(in.psi, cir, lc)};
    cfg.strategy = Strategy::LV3;
    cfg.observation_times = {0.25, 0.5, 0.75, 1.0};
    const auto dom = mc::simulate(cfg, in);
    cfg.measure = mc::Measure::Foreign;
    const auto fgn = mc::simulate(cfg, in);
    double worst_bp = 0.0, worst_z = 0.0;
    for (double T : cfg.observation_times) {
        const auto obs = fgn.observation_index(T);
        const auto iv = mc_implied_vol(fgn.s[obs], T, 1.0, 1.0, false);
        const double market = c.snapshot.asset_vols.find(T)->atm_vol();
        worst_bp = std::max(worst_bp, iv.ok() ? std::abs(iv.vol - market) * 1e4 : 1e9);
        // FX is a martingale in the domestic run
        const auto ivx = mc_implied_vol(dom.x[dom.observation_index(T)], T, 1.0, 1.0, false);
        if (const auto* fx = c.snapshot.fx_vols.find(T)) {
            worst_bp = std::max(worst_bp, ivx.ok() ? std::abs(ivx.vol - fx->atm_vol()) * 1e4 : 1e9);
        }
        const auto m = math::moments(dom.s[dom.observation_index(T)]);
        worst_z = std::max(worst_z, std::abs(m.mean - c.mark.q(T)) / m.std_error);
    }
    const bool ok = diff <= 1e-12 && worst_bp <= 20.0 && worst_z <= 3.0;
    return {ok, fmt("unit variance max |SLV - LV| = %.2g (<= 1e-12); CIR: max ATM error %.1f bp (<= 20), max |E[s]-q|/SE = %.2f (<= 3)",
                    diff, worst_bp, worst_z)};
}

// 9. Joint calibration consistency on the constants fixture.
Outcome joint_consistency() {
    const auto snap = load_snapshot(kFixtures / "flat" / "manifest.json");
    const auto in = flat_inputs(snap);
    mc::SimConfig cfg;
    cfg.n_paths = 100'000;
    cfg.observation_times = {0.5, 1.0};
    const auto jr = joint::simulate_joint(cfg, in);
    double worst = 0.0;
    for (const auto& s : jr.steps) {
        // the t = 0 cross-section is deterministic (SE = 0): only roundoff is allowed there
        const double r = std::abs(s.kappa) <= 1e-12 ? 0.0 : std::abs(s.kappa) / s.kappa_se;
        worst = std::max(worst, r);
    }

    // structural check: regress theta_r on log z at the observation dates
    double worst_struct = 0.0;
    for (std::size_t k = 0; k < jr.sim.observation_times.size(); ++k) {
        const double t = jr.sim.observation_times[k];
        const auto& s = jr.sim.s[k];
        const auto& x = jr.sim.x[k];
        double kap = 0.0;
        for (const auto& st : jr.steps) {
            if (std::abs(st.time - t) <= 1e-10) kap = st.kappa;
        }
        if (kap == 0.0) kap = jr.steps.back().kappa;
        const std::size_t n = s.size();
        std::vector<double> ls(n), lx(n), u(n);
        for (std::size_t i = 0; i < n; ++i) {
            ls[i] = std::log(s[i]);
            lx[i] = std::log(x[i]);
            u[i] = ls[i] + lx[i];
        }
        const joint::JointDensity density(ls, lx, cfg.kernel);
        const auto th = joint::theta_r(s, x, kap, density, 1e-8, cfg.kernel);
        const mc::KernelSmoother kernel(u, cfg.kernel);
        const auto m = kernel.smooth(th.values);
        std::vector<double> resid2(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double e = th.values[i] - kernel.at(m, u[i]);
            resid2[i] = e * e;
        }
        const auto v = kernel.smooth(resid2);
        for (std::size_t j = kernel.first_supported(); j <= kernel.last_supported(); ++j) {
            const double uj = kernel.grid_point(j);
            const double noise = std::sqrt(std::max(kernel.at(v, uj), 0.0) / kernel.effective_sample(uj));
            if (noise > 0.0) worst_struct = std::max(worst_struct, std::abs(kernel.at(m, uj)) / noise);
        }
    }

    // kappa = 0: joint correlation is the LV2 correlation, bit for bit
    joint::JointOptions zero;
    zero.zero_kappa = true;
    cfg.n_paths = 20'000;
    const auto j0 = joint::simulate_joint(cfg, in, zero);
    cfg.strategy = Strategy::LV2;
    const auto lv2 = mc::simulate(cfg, in);
    bool identical = j0.sim.history.size() == lv2.history.size();
    for (std::size_t k = 0; identical && k < lv2.history.size(); ++k) identical = j0.sim.history[k].rho_mean == lv2.history[k].rho_mean;
    for (std::size_t k = 0; identical && k < lv2.s.size(); ++k) identical = j0.sim.s[k] == lv2.s[k] && j0.sim.x[k] == lv2.x[k];

    const bool ok = worst <= 3.0 && worst_struct <= 3.0 && identical;
    return {ok, fmt("max |kappa|/SE = %.2f (<= 3) over %zu steps; max |E[theta_r|z]|/noise = %.2f (<= 3); kappa=0 vs LV2 %s",
                    worst, jr.steps.size(), worst_struct, identical ? "identical" : "DIFFERENT")};
}

// 10. Byte-identical outputs across worker counts.
Outcome determinism() {
    const fs::path root = fs::current_path() / "acceptance_determinism";
    fs::remove_all(root);
    std::vector<std::vector<std::pair<std::string, std::string>>> outputs;
    for (unsigned w : {1u, 4u, 8u}) {
        auto run = base_run("flat", 20'000);
        run.sim.workers = w;
        run.sim.observation_times = {1.0};
        run.strategies = {Strategy::BS, Strategy::LV, Strategy::LC, Strategy::LV2, Strategy::LC2};
        run.out = root / ("w" + std::to_string(w));
        run.export_paths = 200;
        app::cmd_calibrate(run);
        auto rp = run;
        rp.strategies = {Strategy::BS, Strategy::LV, Strategy::LC};
        app::cmd_price(rp);
        app::cmd_report(run);
        run.strategies = {Strategy::LV, Strategy::LC2};
        app::cmd_simulate(run);
        auto r3 = run;
        r3.strategies = {Strategy::LV3};
        r3.slv = app::SlvSettings{};
        r3.slv->asset.xi = 0.5;
        r3.slv->asset.kappa = 2.0;
        r3.slv->leverage_paths = 20'000;
        app::cmd_simulate(r3);
        auto rj = run;
        rj.joint = true;
        app::cmd_simulate(rj);
        std::vector<std::pair<std::string, std::string>> files;
        for (const auto& e : fs::directory_iterator(run.out)) {
            std::ifstream in(e.path(), std::ios::binary);
            std::stringstream ss;
            ss << in.rdbuf();
            files.emplace_back(e.path().filename().string(), ss.str());
        }
        std::sort(files.begin(), files.end());
        outputs.push_back(files);
    }
    bool same = outputs[1] == outputs[0] && outputs[2] == outputs[0];
    std::string diff;
    for (std::size_t k = 1; k < outputs.size() && !same; ++k) {
        for (std::size_t i = 0; i < std::min(outputs[0].size(), outputs[k].size()); ++i) {
            if (outputs[0][i] != outputs[k][i]) diff += " " + outputs[0][i].first;
        }
    }
    return {same && !outputs[0].empty(),
            fmt("%zu CSV/JSON files compared across 1, 4, 8 workers: %s%s", outputs[0].size(), same ? "byte-identical" : "differ:",
                diff.c_str())};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"local-vol calibration precision", local_vol_precision},
        {"constant-coefficient quanto oracle", constant_coefficient_oracle},
        {"quanto-pillar fidelity", quanto_pillars},
        {"flat-smile null quanto spread", flat_quanto_spread},
        {"composite closed form", composite_closed_form},
        {"broker conversion round trip", broker_round_trip},
        {"composite fidelity", composite_fidelity},
        {"SLV degeneracy and fidelity", slv},
        {"joint calibration consistency", joint_consistency},
        {"determinism across workers", determinism},
    };
    // optional: run a single criterion by number
    const int only = argc > 1 ? std::atoi(argv[1]) : 0;
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        if (only && static_cast<int>(i + 1) != only) continue;
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        std::printf("criterion %2zu  %-36s %s  (%.1f s)  %s\n", i + 1, criteria[i].first, o.pass ? "PASS" : "FAIL",
                    seconds_since(t0), o.detail.c_str());
        std::fflush(stdout);
        failed += o.pass ? 0 : 1;
    }
    return failed ? 1 : 0;
}
