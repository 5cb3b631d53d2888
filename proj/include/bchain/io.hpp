#pragma once

#include <mutex>
#include <string>
#include <vector>

namespace bchain::io {

// Writes to a sibling temp file and renames it over path.
void write_atomic(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

std::string sha256_hex(const std::string& bytes);

struct ManifestEntry {
  std::string file;  // relative to the output directory
  std::size_t bytes;
  std::string sha256;
};

// Collects artifacts of one run; all writes go through here.
class Manifest {
 public:
  explicit Manifest(std::string out_dir);

  // Atomically writes out_dir/name and records it.
  void write(const std::string& name, const std::string& content);
  // manifest.json with every recorded file, written last.
  void finalize(const std::string& experiment, const std::string& config_sha256);
  std::vector<ManifestEntry> entries() const;
  const std::string& dir() const { return dir_; }

 private:
  std::string dir_;
  mutable std::mutex mu_;
  std::vector<ManifestEntry> entries_;
};

}  // namespace bchain::io
