#include <cstring>
#include <fstream>
#include <sstream>

#include "bchain/errors.hpp"
#include "bchain/mps.hpp"

namespace bchain {

namespace {

constexpr char kMagic[8] = {'B', 'C', 'H', 'A', 'I', 'N', 'M', 'P'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::string& out, T v) {
  out.append(reinterpret_cast<const char*>(&v), sizeof(T));
}

struct Reader {
  const std::string& s;
  std::size_t pos = 0;
  template <class T>
  T get() {
    if (pos + sizeof(T) > s.size()) throw ValidationError("truncated MPS container");
    T v;
    std::memcpy(&v, s.data() + pos, sizeof(T));
    pos += sizeof(T);
    return v;
  }
  int get_count(int limit) {
    const auto v = get<std::int32_t>();
    if (v < 0 || v > limit) throw ValidationError("corrupt MPS container");
    return v;
  }
};

}  // namespace

std::string serialize_mps(const CanonicalMps& st) {
  std::string out(kMagic, kMagic + 8);
  put<std::uint32_t>(out, kVersion);
  put<std::int32_t>(out, st.n_sites());
  put<std::int32_t>(out, st.total_bosons());
  put<std::int32_t>(out, st.chi_max);
  put<double>(out, st.trunc_rel);
  for (int k = 0; k <= st.n_sites(); ++k) {
    const BondSpace& b = st.bond_raw(k);
    put<std::int32_t>(out, static_cast<std::int32_t>(b.charges.size()));
    for (std::size_t s = 0; s < b.charges.size(); ++s) {
      put<std::int32_t>(out, b.charges[s]);
      put<std::int32_t>(out, static_cast<std::int32_t>(b.lambda[s].size()));
      for (Eigen::Index i = 0; i < b.lambda[s].size(); ++i) put<double>(out, b.lambda[s][i]);
    }
  }
  for (int k = 0; k < st.n_sites(); ++k) {
    const SiteTensor& t = st.site(k);
    put<std::int32_t>(out, static_cast<std::int32_t>(t.size()));
    for (const auto& [key, blk] : t) {
      put<std::int32_t>(out, key.first);
      put<std::int32_t>(out, key.second);
      put<std::int32_t>(out, static_cast<std::int32_t>(blk.rows()));
      put<std::int32_t>(out, static_cast<std::int32_t>(blk.cols()));
      out.append(reinterpret_cast<const char*>(blk.data()), sizeof(cplx) * blk.size());
    }
  }
  return out;
}

CanonicalMps deserialize_mps(const std::string& bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), kMagic, 8) != 0)
    throw ValidationError("not an MPS container (bad magic)");
  Reader r{bytes, 8};
  const auto version = r.get<std::uint32_t>();
  if (version != kVersion) throw ValidationError("unsupported MPS container version");
  const int n = r.get_count(1 << 20);
  const int m = r.get_count(1 << 20);
  CanonicalMps st = CanonicalMps::empty(n, m);
  st.chi_max = r.get<std::int32_t>();
  st.trunc_rel = r.get<double>();
  for (int k = 0; k <= n; ++k) {
    BondSpace b;
    const int ns = r.get_count(m + 1);
    for (int s = 0; s < ns; ++s) {
      b.charges.push_back(r.get<std::int32_t>());
      const int len = r.get_count(1 << 24);
      RVec lam(len);
      for (int i = 0; i < len; ++i) lam[i] = r.get<double>();
      b.lambda.push_back(lam);
    }
    st.bond_raw_mut(k) = std::move(b);
  }
  for (int k = 0; k < n; ++k) {
    SiteTensor& t = st.site_mut(k);
    const int nb = r.get_count(1 << 24);
    for (int x = 0; x < nb; ++x) {
      const int i = r.get<std::int32_t>();
      const int q = r.get<std::int32_t>();
      const int rows = r.get_count(1 << 24);
      const int cols = r.get_count(1 << 24);
      CMat blk(rows, cols);
      const std::size_t bytes_needed = sizeof(cplx) * static_cast<std::size_t>(rows) * cols;
      if (r.pos + bytes_needed > bytes.size()) throw ValidationError("truncated MPS container");
      std::memcpy(blk.data(), bytes.data() + r.pos, bytes_needed);
      r.pos += bytes_needed;
      t[{i, q}] = std::move(blk);
    }
  }
  if (r.pos != bytes.size()) throw ValidationError("trailing bytes in MPS container");
  return st;
}

void save_mps(const CanonicalMps& st, const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ValidationError("cannot open " + path + " for writing");
  const std::string s = serialize_mps(st);
  f.write(s.data(), static_cast<std::streamsize>(s.size()));
  if (!f) throw ValidationError("write failed: " + path);
}

CanonicalMps load_mps(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return deserialize_mps(ss.str());
}

}  // namespace bchain
