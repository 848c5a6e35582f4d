#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace scenforge {

/// Reads a whole file; throws std::runtime_error naming the path on failure.
std::string read_text_file(const std::filesystem::path& path);

/// Writes via a sibling temporary file followed by rename, so readers never
/// observe a partially written artifact.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace scenforge
