#pragma once

#include <cstdint>
#include <string>

namespace ganx {

// FNV-1a over a byte string; used for artifact/content checksums.
std::uint64_t fnv1a64(const void* data, std::size_t len);
std::uint64_t fnv1a64(const std::string& s);
std::string hex64(std::uint64_t v);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);
bool file_exists(const std::string& path);

}  // namespace ganx
