#pragma once

#include <string>

namespace arflow {

/// Lowercase hex SHA-256.
std::string sha256_hex(const std::string& bytes);
std::string file_sha256(const std::string& path);

std::string read_file(const std::string& path);

/// Writes to a sibling temporary file, then renames over `path`.
void write_file_atomic(const std::string& path, const std::string& content);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

}  // namespace arflow
