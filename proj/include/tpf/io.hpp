#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace tpf::io {

/// Regular-or-symlinked `.txt` entries under `root`, recursive, sorted by generic relative path.
/// Entries are not opened here; unreadable ones surface when read.
std::vector<std::filesystem::path> list_text_files(const std::filesystem::path& root);

/// Stable document id for a corpus file: relative path, '/' separators, ".txt" dropped.
std::string doc_id_for(const std::filesystem::path& root, const std::filesystem::path& file);

std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temp file then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace tpf::io
