#pragma once

#include <string>

namespace qkdn {

/// Writes `content` to `path` via a sibling temporary file and rename, so a
/// partially written file never carries the final name. Creates parent
/// directories as needed.
void write_file_atomic(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);

}  // namespace qkdn
