#include <chrono>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "graphssl/http.hpp"

#include "graphssl/tudataset.hpp"
#include "graphssl/zip.hpp"

namespace graphssl {

namespace {

// Splits "scheme://host[:port]" + path. httplib takes the origin directly.
std::pair<std::string, std::string> split_url(const std::string& url) {
  const std::size_t scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw std::runtime_error("fetch: bad URL " + url);
  const std::size_t path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

// Scoped per-dataset lock; create_directory is atomic, so the first caller
// wins and later ones spin until it is released.
class LockFile {
 public:
  explicit LockFile(std::filesystem::path path) : path_(std::move(path)) {
    for (int attempt = 0; ; ++attempt) {
      std::error_code ec;
      if (std::filesystem::create_directory(path_, ec) && !ec) break;
      if (attempt > 600) throw std::runtime_error("fetch: lock timeout on " + path_.string());
      std::this_thread::sleep_for(std::chrono::milliseconds(100));
    }
  }
  ~LockFile() {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }

 private:
  std::filesystem::path path_;
};

std::string http_get(const std::string& url) {
  const auto [origin, path] = split_url(url);
#ifndef GRAPHSSL_HAVE_OPENSSL
  if (origin.rfind("https", 0) == 0)
    throw std::runtime_error("fetch: built without TLS support, cannot GET " + url);
#endif
  httplib::Client client(origin);
  client.set_follow_location(true);
  client.set_connection_timeout(30);
  client.set_read_timeout(120);
  auto res = client.Get(path);
  if (!res)
    throw std::runtime_error("fetch: request to " + url + " failed (" +
                             httplib::to_string(res.error()) + ")");
  if (res->status != 200)
    throw std::runtime_error("fetch: GET " + url + " returned HTTP " +
                             std::to_string(res->status));
  return res->body;
}

}  // namespace

std::filesystem::path fetch_dataset(const TuSourceConfig& cfg) {
  namespace fs = std::filesystem;
  if (cfg.dataset_name.empty()) throw std::invalid_argument("fetch: empty dataset name");
  const fs::path dir = cfg.root_dir / cfg.dataset_name;
  if (tu_files_present(dir, cfg.dataset_name)) return dir;

  fs::create_directories(cfg.root_dir);
  LockFile lock(cfg.root_dir / (cfg.dataset_name + ".lock"));
  if (tu_files_present(dir, cfg.dataset_name)) return dir;  // raced with another fetch

  const std::string url = cfg.base_url + "/" + cfg.dataset_name + ".zip";
  const std::string body = http_get(url);
  const std::vector<ZipEntry> entries = zip_extract(body);

  for (const ZipEntry& e : entries) {
    if (e.name.find("..") != std::string::npos) continue;  // refuse path escapes
    // Archives prefix members with "<name>/"; strip nothing, unpack under root.
    const fs::path target = cfg.root_dir / e.name;
    fs::create_directories(target.parent_path());
    std::ofstream out(target, std::ios::binary);
    out.write(e.data.data(), static_cast<std::streamsize>(e.data.size()));
  }

  if (!tu_files_present(dir, cfg.dataset_name))
    throw std::runtime_error("fetch: archive from " + url + " is missing mandatory " +
                             cfg.dataset_name + " files");
  return dir;
}

}  // namespace graphssl
