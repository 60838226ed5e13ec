#pragma once

#include <cstdio>
#include <string>

namespace gpocc::io {

/// Shortest text form that round-trips the exact double (%.17g).
inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace gpocc::io
