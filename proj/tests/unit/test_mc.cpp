#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "qlc/mc/engine.hpp"

using namespace qlc;
using namespace qlc::mc;
using Catch::Approx;

namespace {

SimInputs flat_inputs(double gamma) {
    SimInputs in;
    in.eta = LocalVolSurface::flat(0.2);
    in.psi = LocalVolSurface::flat(0.1);
    in.mark = QuantoMark(QuantoCorrelationCurve::flat(gamma), AtmVolCurve::flat(0.2), AtmVolCurve::flat(0.1), 1.0);
    return in;
}

SimConfig small(Strategy s, std::size_t n = 20000) {
    SimConfig c;
    c.n_paths = n;
    c.steps_per_year = 50.0;
    c.strategy = s;
    c.observation_times = {0.5, 1.0};
    c.workers = 2;
    return c;
}

}  // namespace

TEST_CASE("philox matches the published known answers", "[rng]") {
    using B = Philox4x32::Block;
    CHECK(Philox4x32(0)(B{0, 0, 0, 0}) == B{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(Philox4x32(~0ULL)(B{~0U, ~0U, ~0U, ~0U}) == B{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(Philox4x32(0x299f31d0a4093822ULL)(B{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}) ==
          B{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("normal stream is a pure function of its counters", "[rng]") {
    const NormalStream a(7), b(7), c(8);
    CHECK(a.pair(3, 4, 0) == b.pair(3, 4, 0));
    CHECK(a.pair(3, 4, 0) != a.pair(3, 4, 1));
    CHECK(a.pair(3, 4, 0) != c.pair(3, 4, 0));
    double sum = 0.0, sq = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const auto [u, v] = a.pair(static_cast<std::uint64_t>(i), 0, 0);
        sum += u + v;
        sq += u * u + v * v;
    }
    CHECK(std::abs(sum / (2.0 * n)) < 4.0 / std::sqrt(2.0 * n));
    CHECK(sq / (2.0 * n) == Approx(1.0).margin(0.015));
}

TEST_CASE("kernel regression recovers a smooth conditional mean", "[kernel]") {
    std::mt19937_64 gen(5);
    std::normal_distribution<double> nd;
    const std::size_t n = 100000;
    std::vector<double> u(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        u[i] = nd(gen);
        y[i] = 1.0 + 0.5 * std::sin(u[i]) + 0.1 * nd(gen);
    }
    const KernelSmoother k(u);
    CHECK(k.bandwidth() == Approx(1.5 * std::pow(static_cast<double>(n), -0.2)).epsilon(0.02));
    const auto m = k.smooth(y);
    for (double q : {-1.5, -0.5, 0.0, 0.7, 1.5}) CHECK(k.at(m, q) == Approx(1.0 + 0.5 * std::sin(q)).margin(0.02));
    CHECK_FALSE(k.thin(0.0));
    CHECK(k.thin(50.0));
}

TEST_CASE("kernel regression on an unspread sample is the plain mean", "[kernel]") {
    const std::vector<double> u(100, 1.0), y{std::vector<double>(100, 3.0)};
    const KernelSmoother k(u);
    CHECK(k.degenerate());
    CHECK(k.at(k.smooth(y), 1.0) == 3.0);
    CHECK_THROWS_AS(KernelSmoother(std::vector<double>(10, 1.0)), BandwidthTooSmall);
}

TEST_CASE("rho clipping is counted", "[correlation]") {
    ClipStats st;
    CHECK(clip_rho(0.4, st) == 0.4);
    CHECK(clip_rho(1.3, st) == 1.0);
    CHECK(clip_rho(-2.0, st) == -1.0);
    CHECK(st.evaluations == 3);
    CHECK(st.clipped == 2);
    CHECK(st.clip_fraction() == Approx(2.0 / 3.0));
}

TEST_CASE("every strategy reprices the quanto forward on flat inputs", "[engine]") {
    const auto in = flat_inputs(-0.3);
    for (auto s : {Strategy::BS, Strategy::LV, Strategy::LC, Strategy::Constant}) {
        auto cfg = small(s);
        cfg.constant_rho = -0.3;
        const auto r = simulate(cfg, in);
        for (double T : {0.5, 1.0}) {
            const auto m = math::moments(r.s[r.observation_index(T)]);
            INFO(to_string(s) << " T=" << T);
            CHECK(std::abs(m.mean - std::exp(0.006 * T)) < 4.0 * m.std_error);
            CHECK(math::mean(r.x[r.observation_index(T)]) == Approx(1.0).margin(4.0 * 0.1 / std::sqrt(20000.0)));
        }
        for (const auto& h : r.history) CHECK(h.rho_mean == Approx(-0.3).margin(0.02));
    }
}

TEST_CASE("foreign measure leaves the asset driftless", "[engine]") {
    auto cfg = small(Strategy::BS);
    cfg.measure = Measure::Foreign;
    const auto r = simulate(cfg, flat_inputs(-0.3));
    const auto ms = math::moments(r.s.back());
    const auto mx = math::moments(r.x.back());
    CHECK(std::abs(ms.mean - 1.0) < 4.0 * ms.std_error);
    CHECK(std::abs(mx.mean - std::exp(0.01)) < 4.0 * mx.std_error);
}

TEST_CASE("paths do not depend on the worker count", "[engine]") {
    const auto in = flat_inputs(-0.3);
    auto c1 = small(Strategy::LC, 5000);
    c1.workers = 1;
    auto c4 = c1;
    c4.workers = 4;
    const auto a = simulate(c1, in), b = simulate(c4, in);
    CHECK(a.s == b.s);
    CHECK(a.x == b.x);
    REQUIRE(a.history.size() == b.history.size());
    for (std::size_t i = 0; i < a.history.size(); ++i) CHECK(a.history[i].rho_mean == b.history[i].rho_mean);
}

TEST_CASE("simulation config is validated", "[engine]") {
    auto c = small(Strategy::LV);
    c.n_paths = 10;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    CHECK_THROWS_AS(parse_strategy("LV9"), ConfigError);
    CHECK(parse_strategy("LC2") == Strategy::LC2);
    auto d = small(Strategy::LV2);
    CHECK_THROWS_AS(simulate(d, flat_inputs(-0.3)), ConfigError);  // no composite surface
}
