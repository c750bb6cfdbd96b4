#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace edudss {

std::uint32_t crc32_of(std::string_view bytes);

// Lowercase 8-digit hex rendering used in manifests and log lines.
std::string crc32_hex(std::string_view bytes);

std::string read_file(const std::filesystem::path& path);

}  // namespace edudss
