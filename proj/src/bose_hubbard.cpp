#include "bchain/bose_hubbard.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "bchain/errors.hpp"
#include "bchain/mps.hpp"

namespace bchain {

HoppingKind parse_hopping_kind(const std::string& s) {
  if (s == "CH" || s == "ch") return HoppingKind::CH;
  if (s == "PTH" || s == "pth") return HoppingKind::PTH;
  throw ValidationError("unknown hopping profile '" + s + "' (expected CH or PTH)");
}

const char* hopping_kind_name(HoppingKind k) { return k == HoppingKind::CH ? "CH" : "PTH"; }

std::vector<double> hopping_profile(HoppingKind kind, int n, double lambda) {
  require(n >= 2, "hopping profile needs N >= 2");
  require(lambda > 0.0, "hopping scale must be positive");
  std::vector<double> j(n - 1);
  for (int k = 1; k < n; ++k)
    j[k - 1] = kind == HoppingKind::CH ? 1.0 : 0.5 * lambda * std::sqrt(static_cast<double>(k) * (n - k));
  return j;
}

void BhChainSpec::validate() const {
  require(n_sites >= 1, "n_sites must be positive");
  require(static_cast<int>(U.size()) == n_sites, "U must have n_sites entries");
  require(static_cast<int>(mu.size()) == n_sites, "mu must have n_sites entries");
  require(static_cast<int>(J.size()) == std::max(0, n_sites - 1), "J must have n_sites-1 entries");
  require(onsite.empty() || static_cast<int>(onsite.size()) == n_sites, "onsite table must cover every site");
  auto finite = [](const std::vector<double>& v) {
    for (double x : v)
      if (!std::isfinite(x)) return false;
    return true;
  };
  require(finite(U) && finite(J) && finite(mu), "chain parameters must be finite");
  for (const auto& t : onsite) require(finite(t), "onsite table must be finite");
}

std::uint64_t BhChainSpec::hash() const {
  // FNV-1a over the raw parameter bytes
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ULL;
    }
  };
  mix(&n_sites, sizeof n_sites);
  for (const auto* v : {&U, &J, &mu}) {
    const std::size_t n = v->size();
    mix(&n, sizeof n);
    mix(v->data(), n * sizeof(double));
  }
  for (const auto& t : onsite) {
    const std::size_t n = t.size();
    mix(&n, sizeof n);
    mix(t.data(), n * sizeof(double));
  }
  return h;
}

double BhChainSpec::site_energy(int site, int n) const {
  double e = 0.5 * U[site] * n * (n - 1) + mu[site] * n;
  if (!onsite.empty()) {
    const auto& t = onsite[site];
    require(n < static_cast<int>(t.size()), "onsite table too short for occupation");
    e += t[n];
  }
  return e;
}

BhChainSpec BhChainSpec::make(int n_sites, const std::vector<double>& J, double U, double mu) {
  BhChainSpec s;
  s.n_sites = n_sites;
  s.J = J;
  s.U.assign(n_sites, U);
  s.mu.assign(n_sites, mu);
  s.validate();
  return s;
}

double onsite_weight(int n_sites, int site, int bond) {
  if (site != bond && site != bond + 1) return 0.0;
  const bool terminal = site == 0 || site == n_sites - 1;
  return terminal ? 1.0 : 0.5;
}

TwoSiteGate bond_hamiltonian(const BhChainSpec& spec, int b, int d) {
  require(b >= 0 && b + 1 < spec.n_sites, "bond out of range");
  TwoSiteGate h(d);
  const double wl = onsite_weight(spec.n_sites, b, b);
  const double wr = onsite_weight(spec.n_sites, b + 1, b);
  const double jb = spec.J[b];
  for (int p = 0; p < h.n_blocks(); ++p) {
    CMat& m = h.block_mut(p);
    m.setZero();
    const int lo = h.lo(p);
    for (int a = 0; a < h.block_dim(p); ++a) {
      const int i = lo + a, j = p - i;
      m(a, a) = wl * spec.site_energy(b, i) + wr * spec.site_energy(b + 1, j);
      // a+_{b+1} a_b |i,j> = sqrt(i (j+1)) |i-1, j+1>
      if (i >= 1 && a >= 1) {
        const double amp = -jb * std::sqrt(static_cast<double>(i) * (j + 1));
        m(a - 1, a) = amp;
        m(a, a - 1) = amp;
      }
    }
  }
  return h;
}

TwoSiteGate build_gate(const BhChainSpec& spec, int b, int d, cplx z) {
  TwoSiteGate h = bond_hamiltonian(spec, b, d);
  TwoSiteGate g(d);
  for (int p = 0; p < g.n_blocks(); ++p) g.block_mut(p) = expm_hermitian_scaled(h.block(p), z);
  return g;
}

const TwoSiteGate& GateCache::get(const BhChainSpec& spec, int bond, int d, cplx z) {
  std::lock_guard<std::mutex> lock(mu_);
  auto key = std::make_tuple(spec.hash(), bond, d, z.real(), z.imag());
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  return cache_.emplace(key, build_gate(spec, bond, d, z)).first->second;
}

std::vector<TrotterStep> trotter_schedule(int n, int order) {
  require(n >= 2, "Trotter schedule needs N >= 2");
  require(order == 2, "only second-order splitting is implemented");
  std::vector<TrotterStep> s;
  if (n == 2) return {{0, 1.0}};
  for (int b = 0; b + 1 < n; b += 2) s.push_back({b, 0.5});
  for (int b = 1; b + 1 < n; b += 2) s.push_back({b, 1.0});
  for (int b = 0; b + 1 < n; b += 2) s.push_back({b, 0.5});
  return s;
}

double energy_expectation(const CanonicalMps& st, const BhChainSpec& spec) {
  const int n = st.n_sites();
  require(spec.n_sites == n, "spec and state sizes differ");
  const int d = st.local_dim();
  if (n == 1) return spec.site_energy(0, st.total_bosons());
  double e = 0.0;
  for (int b = 0; b + 1 < n; ++b) e += expectation_two_site(st, b, bond_hamiltonian(spec, b, d)).real();
  return e;
}

double PerturbationProfile::value(int site, double x) const {
  require(site >= 0 && site < n_sites, "site out of range");
  if (site == 0 || site == n_sites - 1) return c2 * x * x + c1 * x;
  const int k = std::min(site, n_sites - 1 - site);
  return eps * k * x;
}

std::vector<std::vector<double>> PerturbationProfile::table(int nmax) const {
  std::vector<std::vector<double>> t(n_sites, std::vector<double>(nmax + 1));
  for (int s = 0; s < n_sites; ++s)
    for (int x = 0; x <= nmax; ++x) t[s][x] = value(s, x);
  return t;
}

PerturbationProfile perturbation_profile(int n, double n0, double eps) {
  require(n >= 2, "perturbation profile needs N >= 2");
  require(n % 2 == 0, "perturbation profile is defined for even N");
  require(std::isfinite(n0) && std::isfinite(eps), "perturbation parameters must be finite");
  PerturbationProfile p;
  p.n_sites = n;
  p.n0 = n0;
  p.eps = eps;
  p.c2 = -eps;
  p.c1 = (0.5 * (n + 1) + 2.0 * n0) * eps;
  return p;
}

LatticeParams lattice_params(double v0, double v_perp, double a_s, double d, const LatticeConstants& c) {
  require(v0 > 0 && v_perp > 0 && a_s > 0 && d > 0, "lattice parameters must be positive");
  const double j = c.A * std::pow(v0, c.B) * std::exp(-c.C * std::sqrt(v0));
  const double u = (2.0 * a_s / d) * std::sqrt(2.0 * M_PI * v_perp) * std::pow(v0, 0.25);
  return {j, u};
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

}  // namespace

BhChainSpec load_spec_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ValidationError("cannot open " + path);
  std::string line;
  if (!std::getline(f, line)) throw ValidationError(path + ": empty CSV");
  const auto header = split_csv(line);
  int cu = -1, cj = -1, cm = -1;
  for (int i = 0; i < static_cast<int>(header.size()); ++i) {
    if (header[i] == "U") cu = i;
    if (header[i] == "J") cj = i;
    if (header[i] == "mu") cm = i;
  }
  if (cu < 0 || cj < 0) throw ValidationError(path + ": CSV needs U and J columns");
  BhChainSpec s;
  int row = 1;
  while (std::getline(f, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv(line);
    auto cell = [&](int c) -> std::string { return c < static_cast<int>(cells.size()) ? cells[c] : ""; };
    auto num = [&](const std::string& v, const char* col) {
      try {
        std::size_t used = 0;
        double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
      } catch (const std::exception&) {
        throw ValidationError(path + ": line " + std::to_string(row) + ": bad value in column " + col);
      }
    };
    s.U.push_back(num(cell(cu), "U"));
    s.mu.push_back(cm >= 0 && !cell(cm).empty() ? num(cell(cm), "mu") : 0.0);
    if (!cell(cj).empty()) s.J.push_back(num(cell(cj), "J"));
  }
  s.n_sites = static_cast<int>(s.U.size());
  if (static_cast<int>(s.J.size()) == s.n_sites && s.n_sites > 0) s.J.pop_back();
  s.validate();
  return s;
}

}  // namespace bchain
