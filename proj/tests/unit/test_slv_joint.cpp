#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "qlc/joint/joint.hpp"
#include "qlc/slv/leverage.hpp"

using namespace qlc;
using Catch::Approx;

namespace {

mc::SimInputs flat_inputs() {
    mc::SimInputs in;
    in.eta = LocalVolSurface::flat(0.2);
    in.psi = LocalVolSurface::flat(0.1);
    in.phi = LocalVolSurface::flat(std::sqrt(0.038));
    in.mark = QuantoMark(QuantoCorrelationCurve::flat(-0.3), AtmVolCurve::flat(0.2), AtmVolCurve::flat(0.1), 1.0);
    return in;
}

mc::SimConfig small(mc::Strategy s) {
    mc::SimConfig c;
    c.n_paths = 5000;
    c.steps_per_year = 24.0;
    c.strategy = s;
    c.observation_times = {1.0};
    c.workers = 2;
    return c;
}

}  // namespace

TEST_CASE("unit variance SLV reproduces the local-vol paths", "[slv]") {
    auto in = flat_inputs();
    const VarianceSpec unit;
    REQUIRE(unit.deterministic_unit());
    in.slv = SlvModel{unit, unit, LeverageSurface::identity(in.eta), LeverageSurface::identity(in.psi)};
    for (auto [slv, lv] : {std::pair{mc::Strategy::LV3, mc::Strategy::LV}, std::pair{mc::Strategy::LV4, mc::Strategy::LV2}}) {
        const auto a = mc::simulate(small(slv), in), b = mc::simulate(small(lv), in);
        for (std::size_t i = 0; i < a.s.back().size(); ++i) {
            CHECK(a.s.back()[i] == Approx(b.s.back()[i]).margin(1e-12));
            CHECK(a.x.back()[i] == Approx(b.x.back()[i]).margin(1e-12));
        }
    }
}

TEST_CASE("unit variance leverage calibration returns the local vol", "[slv]") {
    LeverageConfig lc;
    lc.n_paths = 5000;
    lc.steps_per_year = 24.0;
    lc.horizon = 1.0;
    const auto l = calibrate_leverage(LocalVolSurface::flat(0.2), VarianceSpec{}, lc);
    for (double t : {0.1, 0.5, 1.0}) {
        for (double k : {0.8, 1.0, 1.2}) CHECK(l(t, k) == Approx(0.2).margin(1e-12));
    }
}

TEST_CASE("leverage divides out the conditional variance", "[slv]") {
    VarianceSpec cir{2.0, 1.0, 0.5, 1.0, -0.5};
    LeverageConfig lc;
    lc.n_paths = 20000;
    lc.steps_per_year = 50.0;
    lc.horizon = 1.0;
    const auto l = calibrate_leverage(LocalVolSurface::flat(0.2), cir, lc);
    // negative spot-vol correlation: low prices carry high variance
    CHECK(l.ratio(1.0, 0.85) < l.ratio(1.0, 1.15));
    CHECK(l(1.0, 1.0) == Approx(0.2).margin(0.03));
    CHECK_THROWS_AS(calibrate_leverage(LocalVolSurface::flat(0.2), VarianceSpec{-1.0}, lc), InvalidInput);
}

TEST_CASE("theta_r normalization holds exactly on the sample", "[joint]") {
    std::mt19937_64 gen(11);
    std::normal_distribution<double> nd;
    const std::size_t n = 20000;
    std::vector<double> s(n), x(n), ls(n), lx(n);
    for (std::size_t i = 0; i < n; ++i) {
        ls[i] = 0.2 * nd(gen) - 0.02;
        lx[i] = 0.1 * nd(gen) - 0.005;
        s[i] = std::exp(ls[i]);
        x[i] = std::exp(lx[i]);
    }
    const joint::JointDensity p(ls, lx, mc::KernelSpec{});
    for (double k : {0.01, -0.003}) {
        const auto r = joint::theta_r(s, x, k, p);
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += s[i] * r.values[i];
        CHECK(acc / static_cast<double>(n) == Approx(-k).epsilon(1e-10));
        CHECK(r.flagged < n / 100);
    }
    CHECK(joint::theta_r(s, x, 0.0, p).values == std::vector<double>(n, 0.0));

    const std::vector<double> one(n, 1.0), zero(n, 0.0);
    const joint::JointDensity q(zero, zero, mc::KernelSpec{});
    const auto r0 = joint::theta_r(one, one, 0.01, q);
    CHECK(r0.flagged == n);
    CHECK(r0.values == std::vector<double>(n, 0.0));
}

TEST_CASE("joint run without theta_r is the composite-consistent run", "[joint]") {
    const auto in = flat_inputs();
    joint::JointOptions opt;
    opt.zero_kappa = true;
    const auto j = joint::simulate_joint(small(mc::Strategy::LV2), in, opt);
    const auto lv2 = mc::simulate(small(mc::Strategy::LV2), in);
    CHECK(j.sim.s == lv2.s);
    CHECK(j.sim.x == lv2.x);
}

TEST_CASE("consistent markets give a vanishing kappa", "[joint]") {
    const auto r = joint::simulate_joint(small(mc::Strategy::LV2), flat_inputs());
    REQUIRE_FALSE(r.steps.empty());
    for (const auto& st : r.steps) {
        if (st.time == 0.0) continue;
        CHECK(std::abs(st.kappa) <= 3.0 * st.kappa_se + 1e-12);
    }
    auto in = flat_inputs();
    in.phi.reset();
    CHECK_THROWS_AS(joint::simulate_joint(small(mc::Strategy::LV2), in), ConfigError);
}
