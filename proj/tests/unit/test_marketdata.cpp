#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "qlc/marketdata/black.hpp"
#include "qlc/marketdata/snapshot.hpp"

using namespace qlc;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = QLC_FIXTURES;

double ref_call(double F, double K, double vol, double T, double df) {
    const double sd = vol * std::sqrt(T);
    const double d1 = std::log(F / K) / sd + 0.5 * sd;
    auto N = [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); };
    return df * (F * N(d1) - K * N(d1 - sd));
}

fs::path temp_dir(const std::string& name) {
    auto p = fs::temp_directory_path() / ("qlc_unit_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("black price matches the closed form and put-call parity", "[black]") {
    for (double K : {70.0, 100.0, 130.0}) {
        for (double vol : {0.05, 0.2, 0.8}) {
            const double c = black_price(100.0, K, vol, 2.0, 0.95, OptionKind::Call);
            const double p = black_price(100.0, K, vol, 2.0, 0.95, OptionKind::Put);
            CHECK(c == Approx(ref_call(100.0, K, vol, 2.0, 0.95)).epsilon(1e-12));
            CHECK(c - p == Approx(0.95 * (100.0 - K)).margin(1e-10));
        }
    }
}

TEST_CASE("implied vol inverts black price", "[black]") {
    for (double K : {0.6, 0.9, 1.0, 1.2, 1.8}) {
        for (double vol : {0.01, 0.15, 0.4, 1.5}) {
            const auto kind = K < 1.0 ? OptionKind::Put : OptionKind::Call;
            const double price = black_price(1.0, K, vol, 1.5, 1.0, kind);
            if (price < 1e-14) continue;
            CHECK(implied_vol(price, 1.0, K, 1.5, 1.0, kind) == Approx(vol).margin(1e-7));
        }
    }
}

TEST_CASE("implied vol rejects prices outside arbitrage bounds", "[black]") {
    CHECK_THROWS_AS(implied_vol(1.5, 1.0, 1.0, 1.0, 1.0, OptionKind::Call), NoSolution);
    CHECK_THROWS_AS(implied_vol(-0.1, 1.0, 1.0, 1.0, 1.0, OptionKind::Call), NoSolution);
}

TEST_CASE("discount curve interpolates log discount factors", "[curves]") {
    const DiscountCurve c("EUR", {1.0, 2.0}, {std::exp(-0.02), std::exp(-0.05)});
    CHECK(c.df(0.0) == 1.0);
    CHECK(c.df(1.0) == Approx(std::exp(-0.02)));
    CHECK(c.df(1.5) == Approx(std::exp(-0.035)));
    CHECK_THROWS_AS(DiscountCurve("EUR", {1.0, 0.5}, {0.99, 0.995}), InvalidInput);
}

TEST_CASE("flat fixture loads with consistent roles", "[snapshot]") {
    const auto snap = load_snapshot(kFixtures / "flat" / "manifest.json");
    CHECK(snap.observation_date == "2024-12-16");
    CHECK(snap.domestic.currency() == "EUR");
    CHECK(snap.asset_vols.size() == 5);
    CHECK(*snap.asset_vols.vol_at(1.0, 1.0) == Approx(0.2));
    CHECK(snap.quanto.convention() == QuantoConvention::Gamma);
    CHECK(snap.quanto.quotes().front().mid == Approx(-0.3));
    REQUIRE(snap.composite_vols);
    CHECK(snap.forward_ratio(1.0) == Approx(std::exp(0.025)));
}

TEST_CASE("smiled fixture carries package prices in bp", "[snapshot]") {
    const auto snap = load_snapshot(kFixtures / "smiled" / "manifest.json");
    CHECK(snap.quanto.convention() == QuantoConvention::PriceBp);
    CHECK(snap.quanto.size() == 5);
    CHECK(snap.asset_vols.size() == 10);
    CHECK(snap.asset_vols.atm_variance_increasing());
}

TEST_CASE("snapshot errors name the offending file", "[snapshot]") {
    const auto dir = temp_dir("snapshot");
    for (const auto& e : fs::directory_iterator(kFixtures / "flat")) fs::copy(e.path(), dir / e.path().filename());
    fs::remove(dir / "fx_vols.csv");
    try {
        load_snapshot(dir / "manifest.json");
        FAIL("expected LoadError");
    } catch (const LoadError& e) {
        CHECK(std::string(e.what()).find("fx_vols.csv") != std::string::npos);
    }
    CHECK_THROWS_AS(load_snapshot(dir / "missing.json"), LoadError);

    fs::copy(kFixtures / "flat" / "fx_vols.csv", dir / "fx_vols.csv");
    std::ofstream(dir / "quanto.csv") << "label,maturity_yf,bid,mid,ask,convention\nX,1,-0.2,-0.3,-0.1,gamma\n";
    CHECK_THROWS_AS(load_snapshot(dir / "manifest.json"), LoadError);
}
