#include "edudss/common/checksum.hpp"

#include <zlib.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "edudss/common/error.hpp"

namespace edudss {

std::uint32_t crc32_of(std::string_view bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed large inputs in chunks.
  constexpr std::size_t kChunk = 1u << 30;
  while (!bytes.empty()) {
    const std::size_t take = bytes.size() < kChunk ? bytes.size() : kChunk;
    crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data()),
                static_cast<uInt>(take));
    bytes.remove_prefix(take);
  }
  return static_cast<std::uint32_t>(crc);
}

std::string crc32_hex(std::string_view bytes) {
  char buffer[9];
  std::snprintf(buffer, sizeof(buffer), "%08x", crc32_of(bytes));
  return buffer;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace edudss
