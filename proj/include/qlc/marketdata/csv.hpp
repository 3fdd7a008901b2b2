#pragma once

#include <charconv>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "qlc/error.hpp"

namespace qlc::csv {

struct Row {
    std::size_t line = 0;
    std::vector<std::string> fields;
};

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

/// Reads a CSV file whose first row must equal `header`. Blank lines are skipped.
inline std::vector<Row> read(const std::string& path, const std::vector<std::string>& header) {
    std::ifstream in(path);
    if (!in) throw LoadError(path + ": cannot open file");
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    std::vector<Row> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto fields = split(line);
        if (!have_header) {
            if (fields != header) {
                std::string expected;
                for (const auto& h : header) expected += (expected.empty() ? "" : ",") + h;
                throw LoadError(path + ": line " + std::to_string(line_no) + ": expected header '" + expected + "'");
            }
            have_header = true;
            continue;
        }
        if (fields.size() != header.size()) {
            throw LoadError(path + ": line " + std::to_string(line_no) + ": expected " +
                            std::to_string(header.size()) + " fields, got " + std::to_string(fields.size()));
        }
        rows.push_back({line_no, std::move(fields)});
    }
    if (!have_header) throw LoadError(path + ": missing header row");
    return rows;
}

inline double to_double(const std::string& path, const Row& row, std::size_t col) {
    const std::string& s = row.fields[col];
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw LoadError(path + ": line " + std::to_string(row.line) + ": '" + s + "' is not a number");
    }
    return v;
}

}  // namespace qlc::csv
