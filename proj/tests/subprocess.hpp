// Small helpers for the CLI-level tests: run a command line, capture its
// exit code, compare output files.
#pragma once

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

namespace testutil {

struct RunResult {
    int exit_code{-1};
    std::string output;  // stdout + stderr
};

inline RunResult run(const std::string& cmd) {
    RunResult result;
    FILE* pipe = ::popen((cmd + " 2>&1").c_str(), "r");
    if (!pipe) return result;
    std::array<char, 4096> buf{};
    while (std::fgets(buf.data(), buf.size(), pipe) != nullptr) result.output += buf.data();
    const int status = ::pclose(pipe);
    if (WIFEXITED(status)) result.exit_code = WEXITSTATUS(status);
    return result;
}

inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline bool same_bytes(const std::string& a, const std::string& b) {
    const std::string ca = slurp(a);
    const std::string cb = slurp(b);
    return !ca.empty() && ca == cb;
}

/// Pulls "--key value" pairs out of argv (doctest passes unknown args on).
inline std::string arg_value(int argc, const char* const* argv, const std::string& key,
                             const std::string& fallback = "") {
    for (int i = 0; i + 1 < argc; ++i)
        if (key == argv[i]) return argv[i + 1];
    return fallback;
}

}  // namespace testutil
