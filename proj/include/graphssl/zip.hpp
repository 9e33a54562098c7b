#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace graphssl {

// Minimal ZIP support: enough to unpack corpus archives (stored and deflate
// entries) and to assemble stored-only archives for fixtures.

struct ZipEntry {
  std::string name;
  std::string data;
};

// Parses an in-memory archive via its central directory. Throws
// std::runtime_error on malformed input or unsupported compression.
std::vector<ZipEntry> zip_extract(const std::string& archive);

// Builds a stored (uncompressed) archive from entries.
std::string zip_create(const std::vector<ZipEntry>& entries);

}  // namespace graphssl
