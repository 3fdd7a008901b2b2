#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "qlc/app/run.hpp"

using namespace qlc;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = QLC_FIXTURES;

mc::SimResult fake(mc::Measure m, std::vector<double> s) {
    mc::SimResult r;
    r.measure = m;
    r.n_paths = s.size();
    r.seed = 1;
    r.observation_times = {1.0};
    r.x = {std::vector<double>(s.size(), 1.0)};
    r.s = {std::move(s)};
    return r;
}

fs::path write_config(const std::string& name, const std::string& body) {
    const auto dir = fs::temp_directory_path() / "qlc_unit_app";
    fs::create_directories(dir);
    const auto p = dir / name;
    std::ofstream(p) << body;
    return p;
}

}  // namespace

TEST_CASE("price estimates carry a 95% interval", "[pricing]") {
    const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
    const auto r = price_from_samples(v);
    const double se = std::sqrt((2.25 + 0.25 + 0.25 + 2.25) / 3.0 / 4.0);
    CHECK(r.estimate == 2.5);
    CHECK(r.std_error == Approx(se));
    CHECK(r.ci_high - r.estimate == Approx(1.96 * se));
    CHECK(r.ci_halfwidth() == Approx(1.96 * se));
}

TEST_CASE("quanto call minus put is the discounted quanto forward", "[pricing]") {
    const auto sim = fake(mc::Measure::Domestic, {0.8, 0.95, 1.0, 1.1, 1.3});
    const double K = 1.02, F = 100.0, df = 0.97;
    const auto c = price_quanto_vanilla(sim, 1.0, K, OptionKind::Call, F, df);
    const auto p = price_quanto_vanilla(sim, 1.0, K, OptionKind::Put, F, df);
    const auto f = price_quanto_forward(sim, 1.0, F);
    CHECK(c.estimate - p.estimate == Approx(df * (f.estimate - K * F)).epsilon(1e-14));
    CHECK_THROWS_AS(price_quanto_vanilla(sim, 1.0, 0.0, OptionKind::Call, F, df), InvalidInput);
    CHECK_THROWS_AS(price_quanto_forward(sim, 2.0, F), ConfigError);
}

TEST_CASE("gamma package pairs the domestic and foreign runs", "[pricing]") {
    const auto d = fake(mc::Measure::Domestic, {1.1, 0.9, 1.02});
    const auto f = fake(mc::Measure::Foreign, {1.05, 0.92, 1.0});
    // max(a-1,0) - max(1-a,0) = a - 1
    const auto r = price_gamma_package(d, f, 1.0, 1.0, 0.95, 0.9);
    CHECK(r.estimate == Approx(0.95 * (1.0 / 3.0 * 3.02 - 1.0) - 0.9 * (2.97 / 3.0 - 1.0)).epsilon(1e-12));
    CHECK_THROWS_AS(price_gamma_package(f, d, 1.0, 1.0, 0.95, 0.9), ConfigError);
}

TEST_CASE("run configuration errors are typed", "[app]") {
    CHECK_THROWS_AS(app::load_run_config(fs::path("/nonexistent/run.json")), LoadError);
    const auto manifest = (kFixtures / "flat" / "manifest.json").string();
    const auto bad = write_config("bad.json", R"({"manifest": ")" + manifest + R"(", "simulation": {"strategy": "LV9"}})");
    CHECK_THROWS_AS(app::load_run_config(bad), ConfigError);
    const auto clip = write_config("clip.json", R"({"manifest": ")" + manifest + R"(", "simulation": {"clip_policy": "reflect"}})");
    CHECK_THROWS_AS(app::load_run_config(clip), ConfigError);
    const auto ok = write_config("ok.json", R"({"manifest": ")" + manifest +
                                                R"(", "simulation": {"n_paths": 2000, "strategy": ["BS", "LC"]}})");
    const auto cfg = app::load_run_config(ok);
    CHECK(cfg.sim.n_paths == 2000);
    REQUIRE(cfg.strategies.size() == 2);
    CHECK(cfg.strategies[1] == mc::Strategy::LC);
}
