#pragma once

// Command-line front end.  `run` is the whole program minus process setup, so
// tests can drive it with an argument vector and capture both streams.

#include <iosfwd>
#include <string>
#include <vector>

namespace orbitcount::cli {

// Exit statuses.
inline constexpr int kOk = 0;
inline constexpr int kConfigError = 1;
inline constexpr int kToleranceFailure = 2;
inline constexpr int kResourceCap = 3;

// args excludes the program name.  Artifacts go to --out (atomically) or to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Writes to a sibling temporary file and renames it over `path`.
void write_atomic(const std::string& path, const std::string& content);

// %.9g, the fixed output precision of every artifact.
std::string format_number(double v);

}  // namespace orbitcount::cli
