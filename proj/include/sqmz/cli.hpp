#pragma once

// Command-line front end: `surface`, `diameters`, `estimate`, `verify`.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace sqmz::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitDomain = 2,
  kExitVerification = 3,
};

/// Runs one command. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Shortest decimal string that round-trips to the same double; "nan" for NaN.
std::string format_number(double value);

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Lower-case hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

std::string_view tool_version();

}  // namespace sqmz::cli
