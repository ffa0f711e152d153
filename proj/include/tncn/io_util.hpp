#pragma once

#include <filesystem>
#include <string>

namespace tncn {

/// Writes `content` to `path` via a temp file in the same directory followed
/// by an atomic rename. Throws IoError on failure.
void atomic_write_file(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

/// FNV-1a 64-bit hash of a byte string, rendered as 16 hex chars.
std::string fnv1a_hex(const std::string& bytes);

} // namespace tncn
