#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "qlc/error.hpp"
#include "qlc/format.hpp"
#include "qlc/localvol/surface.hpp"
#include "qlc/marketdata/csv.hpp"

namespace qlc {

// Node values are written with 17 significant digits so a dump/load cycle
// reproduces every double exactly. The JSON sidecar records the
// interpolation scheme so a reader never has to guess it.

inline void save_surface(const LocalVolSurface& surface, const std::filesystem::path& csv_path,
                         const std::string& name = "local_vol") {
    std::ofstream out(csv_path);
    if (!out) throw LoadError("cannot write " + csv_path.string());
    out << "maturity_yf,moneyness,local_vol\n";
    for (const auto& s : surface.slices()) {
        for (std::size_t j = 0; j < s.values.size(); ++j) {
            out << format_g17(s.maturity) << ',' << format_g17(s.moneyness[j]) << ',' << format_g17(s.values[j]) << '\n';
        }
    }
    nlohmann::json header = {
        {"name", name},
        {"data", csv_path.filename().string()},
        {"time_interpolation", "piecewise_constant_left_open"},
        {"strike_interpolation", "monotone_cubic_fritsch_carlson"},
        {"strike_extrapolation", "flat"},
        {"moneyness", "forward"},
        {"slices", surface.size()},
    };
    auto json_path = csv_path;
    json_path.replace_extension(".json");
    std::ofstream(json_path) << header.dump(2) << '\n';
}

inline LocalVolSurface load_surface(const std::filesystem::path& csv_path) {
    const auto path = csv_path.string();
    const auto rows = csv::read(path, {"maturity_yf", "moneyness", "local_vol"});
    std::vector<LocalVolSlice> slices;
    for (const auto& r : rows) {
        const double t = csv::to_double(path, r, 0);
        if (slices.empty() || slices.back().maturity != t) slices.push_back({t, {}, {}});
        slices.back().moneyness.push_back(csv::to_double(path, r, 1));
        slices.back().values.push_back(csv::to_double(path, r, 2));
    }
    try {
        return LocalVolSurface(std::move(slices));
    } catch (const InvalidInput& e) {
        throw LoadError(path + ": " + e.what());
    }
}

}  // namespace qlc
