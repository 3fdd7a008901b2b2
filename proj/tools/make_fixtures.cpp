// Writes the synthetic market snapshots under data/fixtures/.
//
//   flat    constant smiles (asset 0.2, FX 0.1), gamma = -0.3 at every pillar,
//           composite quotes from the constant-correlation closed form
//   smiled  asset, FX and composite quotes repriced by the forward PDE from
//           known local-vol surfaces; quanto packages in bp from a 5-pillar
//           gamma curve
//
// Output is deterministic (no randomness, %.17g numbers).

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <tuple>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "qlc/format.hpp"
#include "qlc/localvol/dupire.hpp"
#include "qlc/quantomark/broker.hpp"

namespace fs = std::filesystem;
using namespace qlc;

namespace {

constexpr double kRateDom = 0.025;
constexpr double kRateFor = 0.04;
constexpr double kDividend = 0.015;
constexpr double kAssetSpot = 6000.0;
constexpr double kFxSpot = 0.95;  // domestic units per foreign unit

using Rows = std::vector<std::tuple<double, double, double>>;

void write_curve(const fs::path& p, double rate) {
    std::ofstream out(p);
    out << "time_yf,discount_factor\n";
    for (double t : {0.25, 0.5, 1.0, 2.0, 3.0, 5.0, 7.0, 10.0}) out << format_g17(t) << ',' << format_g17(std::exp(-rate * t)) << '\n';
}

void write_forwards(const fs::path& p, double spot, double carry) {
    std::ofstream out(p);
    out << "time_yf,forward\n";
    for (double t : {0.25, 0.5, 1.0, 2.0, 3.0, 5.0, 7.0, 10.0}) out << format_g17(t) << ',' << format_g17(spot * std::exp(carry * t)) << '\n';
}

void write_vols(const fs::path& p, const Rows& rows) {
    std::ofstream out(p);
    out << "maturity_yf,moneyness,vol\n";
    for (const auto& [t, k, v] : rows) out << format_g17(t) << ',' << format_g17(k) << ',' << format_g17(v) << '\n';
}

struct Pillar {
    std::string label;
    double t;
    double gamma;
};

BrokerContext context(double t, double sigma_s, double sigma_x) {
    const double ratio = std::exp((kRateFor - kDividend) * t);
    return {t, ratio, std::exp(-kRateDom * t), std::exp(-kRateFor * t), sigma_s, sigma_x};
}

void write_manifest(const fs::path& dir, bool composite) {
    nlohmann::ordered_json doc;
    doc["observation_date"] = "2024-12-16";
    doc["domestic_curve"] = {{"file", "domestic_curve.csv"}, {"currency", "EUR"}};
    doc["foreign_curve"] = {{"file", "foreign_curve.csv"}, {"currency", "USD"}};
    doc["asset_forward"] = {{"file", "asset_forward.csv"}, {"spot", kAssetSpot}};
    doc["fx_forward"] = {{"file", "fx_forward.csv"}, {"spot", kFxSpot}};
    doc["asset_vols"] = {{"file", "asset_vols.csv"}};
    doc["fx_vols"] = {{"file", "fx_vols.csv"}};
    if (composite) doc["composite_vols"] = {{"file", "composite_vols.csv"}};
    doc["quanto"] = {{"file", "quanto.csv"}};
    std::ofstream(dir / "manifest.json") << doc.dump(2) << '\n';
}

void write_common(const fs::path& dir) {
    fs::create_directories(dir);
    write_curve(dir / "domestic_curve.csv", kRateDom);
    write_curve(dir / "foreign_curve.csv", kRateFor);
    write_forwards(dir / "asset_forward.csv", kAssetSpot, kRateFor - kDividend);
    write_forwards(dir / "fx_forward.csv", kFxSpot, kRateDom - kRateFor);
}

void make_flat(const fs::path& dir) {
    write_common(dir);
    const std::vector<double> ts{0.25, 0.5, 1.0, 2.0, 3.0};
    const std::vector<double> ks{0.8, 0.9, 1.0, 1.1, 1.2};
    Rows a, x, c;
    const double composite = std::sqrt(0.2 * 0.2 + 0.1 * 0.1 - 2.0 * 0.3 * 0.2 * 0.1);
    for (double t : ts) {
        for (double k : ks) {
            a.emplace_back(t, k, 0.2);
            x.emplace_back(t, k, 0.1);
            c.emplace_back(t, k, composite);
        }
    }
    write_vols(dir / "asset_vols.csv", a);
    write_vols(dir / "fx_vols.csv", x);
    write_vols(dir / "composite_vols.csv", c);
    std::ofstream q(dir / "quanto.csv");
    q << "label,maturity_yf,bid,mid,ask,convention\n";
    for (const Pillar& p : std::vector<Pillar>{{"Mar25", 0.25, -0.3}, {"Jun25", 0.5, -0.3}, {"Dec25", 1.0, -0.3},
                                                {"Dec26", 2.0, -0.3}, {"Dec27", 3.0, -0.3}}) {
        q << p.label << ',' << format_g17(p.t) << ',' << format_g17(p.gamma - 0.03) << ',' << format_g17(p.gamma)
          << ',' << format_g17(p.gamma + 0.03) << ",gamma\n";
    }
    write_manifest(dir, true);
}

// Known local-vol surface: quadratic in log moneyness on nodes that widen
// with sqrt(T).
LocalVolSurface known_surface(const std::vector<double>& ts, double level, double skew, double curv, double slope,
                              double width) {
    std::vector<LocalVolSlice> slices;
    for (double t : ts) {
        LocalVolSlice s{t, {}, {}};
        for (int j = -4; j <= 4; ++j) {
            const double u = width * std::sqrt(t) * j;
            s.moneyness.push_back(std::exp(u));
            s.values.push_back(level + skew * u + curv * u * u + slope * t);
        }
        slices.push_back(s);
    }
    return LocalVolSurface(slices);
}

Rows reprice(const LocalVolSurface& truth) {
    Rows nodes;
    for (const auto& s : truth.slices()) {
        for (double k : s.moneyness) nodes.emplace_back(s.maturity, k, 0.2);
    }
    const auto layout = VolQuoteSurface::from_rows("2024-12-16", nodes);
    const auto vols = dupire_reprice(truth, PdeGrid::covering(layout), layout);
    Rows rows;
    for (std::size_t i = 0; i < layout.size(); ++i) {
        for (std::size_t j = 0; j < layout[i].moneyness.size(); ++j) {
            rows.emplace_back(layout[i].maturity, layout[i].moneyness[j], vols[i][j]);
        }
    }
    return rows;
}

double atm(const Rows& rows, double t) {
    for (const auto& [tt, k, v] : rows) {
        if (tt == t && k == 1.0) return v;
    }
    throw InvalidInput("no ATM quote at " + std::to_string(t));
}

void make_smiled(const fs::path& dir) {
    write_common(dir);
    const std::vector<double> ts{1.0 / 12.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0};
    const auto asset = reprice(known_surface(ts, 0.2, -0.3, 0.5, 0.01, 0.11));
    const std::vector<double> tx{0.25, 0.5, 1.0, 2.0, 3.0};
    const auto fx = reprice(known_surface(tx, 0.1, 0.05, 0.3, 0.002, 0.055));

    // composite local vol from the asset's and FX's at a -0.3 correlation,
    // both read at the composite moneyness
    const auto eta = known_surface(tx, 0.2, -0.3, 0.5, 0.01, 0.11);
    const auto psi = known_surface(tx, 0.1, 0.05, 0.3, 0.002, 0.055);
    std::vector<LocalVolSlice> phi;
    for (double t : tx) {
        LocalVolSlice s{t, {}, {}};
        for (int j = -4; j <= 4; ++j) {
            const double k = std::exp(0.1 * std::sqrt(t) * j);
            const double a = eta(t, k), b = psi(t, 1.0);
            s.moneyness.push_back(k);
            s.values.push_back(std::sqrt(a * a + b * b - 0.6 * a * b));
        }
        phi.push_back(s);
    }
    const auto composite = reprice(LocalVolSurface(phi));

    write_vols(dir / "asset_vols.csv", asset);
    write_vols(dir / "fx_vols.csv", fx);
    write_vols(dir / "composite_vols.csv", composite);

    std::ofstream q(dir / "quanto.csv");
    q << "label,maturity_yf,bid,mid,ask,convention\n";
    for (const Pillar& p : std::vector<Pillar>{{"Mar25", 0.25, -0.20}, {"Jun25", 0.5, -0.25}, {"Dec25", 1.0, -0.30},
                                                {"Dec26", 2.0, -0.33}, {"Dec27", 3.0, -0.35}}) {
        const double mid = broker_from_gamma(p.gamma, context(p.t, atm(asset, p.t), atm(fx, p.t))) * 1e4;
        const double half = 5.0 + 2.0 * p.t;
        q << p.label << ',' << format_g17(p.t) << ',' << format_g17(mid - half) << ',' << format_g17(mid) << ','
          << format_g17(mid + half) << ",price_bp\n";
    }
    write_manifest(dir, true);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Generate the synthetic market fixtures"};
    std::string root = "data/fixtures";
    app.add_option("--out", root, "Fixture root directory");
    CLI11_PARSE(app, argc, argv);
    try {
        make_flat(fs::path(root) / "flat");
        make_smiled(fs::path(root) / "smiled");
    } catch (const std::exception& e) {
        std::cerr << "make_fixtures: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
