#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace molsps {

/// Writes `contents` to a sibling temporary file and renames it over `path`,
/// so readers never observe a partially written output.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string read_file(const std::filesystem::path& path);

/// Lower-case hex SHA-256.
std::string sha256_hex(std::string_view bytes);
std::string file_sha256(const std::filesystem::path& path);

/// Shortest decimal text that round-trips the double exactly.
std::string format_double(double value);

}  // namespace molsps
