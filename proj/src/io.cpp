#include "bchain/io.hpp"

#include <openssl/evp.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "bchain/errors.hpp"

namespace bchain::io {

void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const std::string tmp = path + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw ResourceError("cannot open " + tmp + " for writing");
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    f.flush();
    if (!f) throw ResourceError("write failed for " + tmp);
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw ResourceError("cannot rename " + tmp + ": " + ec.message());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot read " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw NumericalError("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 15]);
  }
  return out;
}

Manifest::Manifest(std::string out_dir) : dir_(std::move(out_dir)) { std::filesystem::create_directories(dir_); }

void Manifest::write(const std::string& name, const std::string& content) {
  write_atomic((std::filesystem::path(dir_) / name).string(), content);
  std::lock_guard<std::mutex> lk(mu_);
  for (auto& e : entries_)
    if (e.file == name) {
      e.bytes = content.size();
      e.sha256 = sha256_hex(content);
      return;
    }
  entries_.push_back({name, content.size(), sha256_hex(content)});
}

std::vector<ManifestEntry> Manifest::entries() const {
  std::lock_guard<std::mutex> lk(mu_);
  return entries_;
}

void Manifest::finalize(const std::string& experiment, const std::string& config_sha256) {
  nlohmann::json j;
  j["experiment"] = experiment;
  j["config_sha256"] = config_sha256;
  j["files"] = nlohmann::json::array();
  for (const auto& e : entries()) j["files"].push_back({{"file", e.file}, {"bytes", e.bytes}, {"sha256", e.sha256}});
  write_atomic((std::filesystem::path(dir_) / "manifest.json").string(), j.dump(2) + "\n");
}

}  // namespace bchain::io
