#pragma once

// Command-line front end: subcommands overlap, derive, intrinsic, query,
// train and eval. Every run writes manifest.json into the output directory.

#include <iosfwd>
#include <string>
#include <vector>

namespace embeval::cli {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;  // bad flags, unreadable or unwritable files
inline constexpr int kExitData = 3;   // malformed or inconsistent input data
inline constexpr int kExitInternal = 1;

int run(int argc, const char* const* argv);
// `args` excludes the program name. Diagnostics and progress go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Lowercase hex SHA-256 of a file's contents; throws IoError.
std::string sha256_file(const std::string& path);

}  // namespace embeval::cli
