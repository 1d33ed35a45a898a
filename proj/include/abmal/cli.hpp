#pragma once

#include <filesystem>
#include <string>

namespace abmal {

/// Runs the abmal command line. Exit codes: 0 success, 1 runtime or data
/// failure, 2 usage error.
int run_cli(int argc, char** argv);

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace abmal
