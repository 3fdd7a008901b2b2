#pragma once

#include <cstdio>
#include <string>

namespace qlc {

/// Shortest-safe round-trip form for dumps that must reload bit-exactly.
inline std::string format_g17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Report form: 10 significant digits.
inline std::string format_sig(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

}  // namespace qlc
