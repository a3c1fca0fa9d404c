#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace cmlab {

/// Whole-file read. Throws ConfigError if the file cannot be opened.
std::string read_file(const std::string& path);

/// Writes to a sibling temporary file and renames it over `path`, so readers
/// never observe a partial file. Creates missing parent directories.
void write_file_atomic(const std::string& path, std::string_view content);

/// 64-bit FNV-1a, rendered as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view data);

}  // namespace cmlab
