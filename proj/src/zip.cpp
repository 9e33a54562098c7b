#include "graphssl/zip.hpp"

#include <zlib.h>

#include <cstring>
#include <stdexcept>

namespace graphssl {

namespace {

std::uint16_t rd16(const std::string& s, std::size_t off) {
  return static_cast<std::uint16_t>(static_cast<unsigned char>(s[off]) |
                                    (static_cast<unsigned char>(s[off + 1]) << 8));
}

std::uint32_t rd32(const std::string& s, std::size_t off) {
  return static_cast<std::uint32_t>(static_cast<unsigned char>(s[off]) |
                                    (static_cast<unsigned char>(s[off + 1]) << 8) |
                                    (static_cast<unsigned char>(s[off + 2]) << 16) |
                                    (static_cast<unsigned char>(s[off + 3]) << 24));
}

void wr16(std::string& s, std::uint16_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>((v >> 8) & 0xff));
}

void wr32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::string inflate_raw(const char* src, std::size_t src_len, std::size_t out_len) {
  std::string out(out_len, '\0');
  z_stream zs{};
  if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) throw std::runtime_error("zip: inflateInit failed");
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(src));
  zs.avail_in = static_cast<uInt>(src_len);
  zs.next_out = reinterpret_cast<Bytef*>(out.data());
  zs.avail_out = static_cast<uInt>(out_len);
  const int rc = inflate(&zs, Z_FINISH);
  inflateEnd(&zs);
  if (rc != Z_STREAM_END || zs.total_out != out_len)
    throw std::runtime_error("zip: deflate stream corrupt");
  return out;
}

constexpr std::uint32_t kLocalSig = 0x04034b50;
constexpr std::uint32_t kCentralSig = 0x02014b50;
constexpr std::uint32_t kEocdSig = 0x06054b50;

}  // namespace

std::vector<ZipEntry> zip_extract(const std::string& a) {
  // End-of-central-directory record: scan backwards over a possible comment.
  if (a.size() < 22) throw std::runtime_error("zip: archive too small");
  std::size_t eocd = std::string::npos;
  for (std::size_t off = a.size() - 22; ; --off) {
    if (rd32(a, off) == kEocdSig) {
      eocd = off;
      break;
    }
    if (off == 0 || a.size() - off > 22 + 65535) break;
  }
  if (eocd == std::string::npos) throw std::runtime_error("zip: missing end-of-central-directory");

  const std::uint16_t count = rd16(a, eocd + 10);
  std::size_t cdir = rd32(a, eocd + 16);

  std::vector<ZipEntry> entries;
  for (std::uint16_t i = 0; i < count; ++i) {
    if (cdir + 46 > a.size() || rd32(a, cdir) != kCentralSig)
      throw std::runtime_error("zip: corrupt central directory");
    const std::uint16_t method = rd16(a, cdir + 10);
    const std::uint32_t comp_size = rd32(a, cdir + 20);
    const std::uint32_t uncomp_size = rd32(a, cdir + 24);
    const std::uint16_t name_len = rd16(a, cdir + 28);
    const std::uint16_t extra_len = rd16(a, cdir + 30);
    const std::uint16_t comment_len = rd16(a, cdir + 32);
    const std::uint32_t local_off = rd32(a, cdir + 42);
    std::string name = a.substr(cdir + 46, name_len);
    cdir += 46u + name_len + extra_len + comment_len;

    if (local_off + 30 > a.size() || rd32(a, local_off) != kLocalSig)
      throw std::runtime_error("zip: corrupt local header for " + name);
    const std::uint16_t lname = rd16(a, local_off + 26);
    const std::uint16_t lextra = rd16(a, local_off + 28);
    const std::size_t data_off = local_off + 30u + lname + lextra;
    if (data_off + comp_size > a.size()) throw std::runtime_error("zip: truncated entry " + name);

    if (!name.empty() && name.back() == '/') continue;  // directory entry

    ZipEntry e;
    e.name = std::move(name);
    if (method == 0) {
      e.data = a.substr(data_off, comp_size);
    } else if (method == 8) {
      e.data = inflate_raw(a.data() + data_off, comp_size, uncomp_size);
    } else {
      throw std::runtime_error("zip: unsupported compression method " + std::to_string(method));
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

std::string zip_create(const std::vector<ZipEntry>& entries) {
  std::string out;
  std::vector<std::size_t> offsets;
  std::vector<std::uint32_t> crcs;
  for (const ZipEntry& e : entries) {
    offsets.push_back(out.size());
    const std::uint32_t crc = static_cast<std::uint32_t>(
        crc32(0L, reinterpret_cast<const Bytef*>(e.data.data()), static_cast<uInt>(e.data.size())));
    crcs.push_back(crc);
    wr32(out, kLocalSig);
    wr16(out, 20);  // version needed
    wr16(out, 0);   // flags
    wr16(out, 0);   // method: stored
    wr16(out, 0);   // mod time
    wr16(out, 0);   // mod date
    wr32(out, crc);
    wr32(out, static_cast<std::uint32_t>(e.data.size()));
    wr32(out, static_cast<std::uint32_t>(e.data.size()));
    wr16(out, static_cast<std::uint16_t>(e.name.size()));
    wr16(out, 0);  // extra
    out += e.name;
    out += e.data;
  }
  const std::size_t cdir_start = out.size();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const ZipEntry& e = entries[i];
    wr32(out, kCentralSig);
    wr16(out, 20);
    wr16(out, 20);
    wr16(out, 0);
    wr16(out, 0);
    wr16(out, 0);
    wr16(out, 0);
    wr32(out, crcs[i]);
    wr32(out, static_cast<std::uint32_t>(e.data.size()));
    wr32(out, static_cast<std::uint32_t>(e.data.size()));
    wr16(out, static_cast<std::uint16_t>(e.name.size()));
    wr16(out, 0);
    wr16(out, 0);
    wr16(out, 0);
    wr16(out, 0);
    wr32(out, 0);
    wr32(out, static_cast<std::uint32_t>(offsets[i]));
    out += e.name;
  }
  const std::size_t cdir_size = out.size() - cdir_start;
  wr32(out, kEocdSig);
  wr16(out, 0);
  wr16(out, 0);
  wr16(out, static_cast<std::uint16_t>(entries.size()));
  wr16(out, static_cast<std::uint16_t>(entries.size()));
  wr32(out, static_cast<std::uint32_t>(cdir_size));
  wr32(out, static_cast<std::uint32_t>(cdir_start));
  wr16(out, 0);
  return out;
}

}  // namespace graphssl
