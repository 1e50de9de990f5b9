#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace sdml {

/// Writes `bytes` to a sibling temporary file and renames it over `path`, so
/// readers never observe a partial file.
void atomic_write(const std::filesystem::path& path, std::string_view bytes);

std::string read_file(const std::filesystem::path& path);

/// Shortest decimal text that round-trips to `v`.
std::string format_real(double v);

}  // namespace sdml
