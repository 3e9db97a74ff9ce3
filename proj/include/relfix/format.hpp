#pragma once

#include <cstdio>
#include <string>

namespace relfix {

/// Shortest-safe round-trip text for a double ("%.17g").
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace relfix
