#include "bchain/mps.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

#include "bchain/errors.hpp"
#include "bchain/kernels.hpp"

namespace bchain {

int BondSpace::find(int q) const {
  auto it = std::lower_bound(charges.begin(), charges.end(), q);
  if (it == charges.end() || *it != q) return -1;
  return static_cast<int>(it - charges.begin());
}

int BondSpace::dim(int q) const {
  const int s = find(q);
  return s < 0 ? 0 : static_cast<int>(lambda[s].size());
}

int BondSpace::total() const {
  int t = 0;
  for (const auto& l : lambda) t += static_cast<int>(l.size());
  return t;
}

BondSpace BondSpace::single(int q) {
  BondSpace b;
  b.charges = {q};
  b.lambda = {RVec::Ones(1)};
  return b;
}

CanonicalMps CanonicalMps::empty(int n_sites, int total_bosons) {
  require(n_sites >= 1, "chain needs at least one site");
  require(total_bosons >= 0, "negative particle number");
  CanonicalMps s;
  s.m_ = total_bosons;
  s.bonds_.resize(n_sites + 1);
  s.sites_.resize(n_sites);
  s.bonds_.front() = BondSpace::single(total_bosons);
  s.bonds_.back() = BondSpace::single(0);
  return s;
}

int CanonicalMps::max_bond_dim() const {
  int m = 1;
  for (const auto& b : bonds_) m = std::max(m, b.total());
  return m;
}

SiteTensor CanonicalMps::gamma(int k) const {
  SiteTensor g = sites_.at(k);
  const BondSpace& r = bonds_.at(k + 1);
  for (auto& [key, blk] : g) {
    const RVec& lam = r.lambda[r.find(key.second)];
    for (Eigen::Index c = 0; c < blk.cols(); ++c) {
      const double l = lam[c];
      blk.col(c) *= (l > 0.0 ? 1.0 / l : 0.0);
    }
  }
  return g;
}

CanonicalMps from_product_fock(const std::vector<int>& occupations) {
  require(!occupations.empty(), "empty occupation list");
  for (int n : occupations) require(n >= 0, "negative occupation");
  const int n_sites = static_cast<int>(occupations.size());
  const int m = std::accumulate(occupations.begin(), occupations.end(), 0);
  CanonicalMps s = CanonicalMps::empty(n_sites, m);
  int right = m;
  for (int k = 0; k < n_sites; ++k) {
    s.bond_raw_mut(k) = BondSpace::single(right);
    right -= occupations[k];
    s.site_mut(k)[{occupations[k], right}] = CMat::Ones(1, 1);
  }
  s.bond_raw_mut(n_sites) = BondSpace::single(0);
  return s;
}

void apply_one_site(CanonicalMps& state, int site, const CMat& gate, double tol) {
  const int d = state.local_dim();
  require(site >= 0 && site < state.n_sites(), "site out of range");
  require(gate.rows() == d && gate.cols() == d, "one-site gate must be d x d");
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c)
      if (r != c && std::abs(gate(r, c)) > tol)
        throw ValidationError("one-site gate does not conserve the occupation");
  for (int r = 0; r < d; ++r)
    if (std::abs(std::abs(gate(r, r)) - 1.0) > tol) throw ValidationError("one-site gate is not unitary");
  for (auto& [key, blk] : state.site_mut(site)) blk *= gate(key.first, key.first);
}

namespace {

using ThetaKey = std::tuple<int, int, int>;  // (right charge, i, j)
using Theta = std::map<ThetaKey, CMat>;

// Theta~^{ij} = B[b]^i B[b+1]^j, blocks dim(L, qg+i+j) x dim(R, qg).
Theta build_theta(const CanonicalMps& st, int b) {
  Theta th;
  const SiteTensor& a = st.site(b);
  const SiteTensor& c = st.site(b + 1);
  for (const auto& [kc, bc] : c) {
    const int j = kc.first, qg = kc.second, qm = qg + j;
    for (const auto& [ka, ba] : a) {
      if (ka.second != qm) continue;
      th[{qg, ka.first, j}] = ba * bc;
    }
  }
  return th;
}

Theta apply_gate(const Theta& th, const TwoSiteGate& g) {
  // group by (qa, qg); all blocks in a group share a shape
  std::map<std::pair<int, int>, std::vector<std::pair<int, const CMat*>>> groups;
  for (const auto& [k, m] : th) {
    const auto [qg, i, j] = k;
    groups[{qg + i + j, qg}].push_back({i, &m});
  }
  Theta out;
  for (const auto& [qq, members] : groups) {
    const int qa = qq.first, qg = qq.second, p = qa - qg;
    const int lo = g.lo(p), dim = g.block_dim(p);
    const CMat& gb = g.block(p);
    const Eigen::Index rows = members.front().second->rows(), cols = members.front().second->cols();
    const std::size_t n = static_cast<std::size_t>(rows * cols);
    for (int a = 0; a < dim; ++a) {
      CMat acc = CMat::Zero(rows, cols);
      bool any = false;
      for (const auto& [i_old, mp] : members) {
        const cplx w = gb(a, i_old - lo);
        if (w == cplx(0.0)) continue;
        kernels::axpy(w, mp->data(), acc.data(), n);
        any = true;
      }
      if (any) {
        const int i = lo + a;
        out[{qg, i, p - i}] = std::move(acc);
      }
    }
  }
  return out;
}

struct Candidate {
  double s;
  int sector;
  int idx;
};

// Keep values >= trunc_rel * max, then cap at chi_max (ties: lower charge, lower index).
// Returns kept count per sector.
std::vector<int> select_kept(const std::vector<RVec>& values, const std::vector<int>& charges,
                             double trunc_rel, int chi_max, TruncationInfo& info) {
  double smax = 0.0, total = 0.0;
  for (const auto& v : values)
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      smax = std::max(smax, v[i]);
      total += v[i] * v[i];
    }
  if (!(smax > 0.0) || !std::isfinite(smax)) throw NumericalError("empty Schmidt spectrum after update");
  std::vector<Candidate> cand;
  for (std::size_t s = 0; s < values.size(); ++s)
    for (Eigen::Index i = 0; i < values[s].size(); ++i)
      if (values[s][i] >= trunc_rel * smax) cand.push_back({values[s][i], static_cast<int>(s), static_cast<int>(i)});
  if (chi_max > 0 && static_cast<int>(cand.size()) > chi_max) {
    std::sort(cand.begin(), cand.end(), [&](const Candidate& x, const Candidate& y) {
      if (x.s != y.s) return x.s > y.s;
      if (charges[x.sector] != charges[y.sector]) return charges[x.sector] < charges[y.sector];
      return x.idx < y.idx;
    });
    cand.resize(chi_max);
    info.capped = true;
  }
  std::vector<int> kept(values.size(), 0);
  double w = 0.0;
  for (const auto& c : cand) {
    kept[c.sector] = std::max(kept[c.sector], c.idx + 1);
    w += c.s * c.s;
  }
  info.kept = static_cast<int>(cand.size());
  info.norm = std::sqrt(w);
  info.discarded = total > 0.0 ? std::max(0.0, 1.0 - w / total) : 0.0;
  return kept;
}

}  // namespace

TruncationInfo apply_two_site(CanonicalMps& st, int b, const TwoSiteGate& gate) {
  require(b >= 0 && b + 1 < st.n_sites(), "bond out of range");
  require(gate.local_dim() == st.local_dim(), "gate local dimension does not match the state");
  const int d = st.local_dim();
  const BondSpace& left = st.bond_raw(b);
  const BondSpace& right = st.bond_raw(b + 2);

  Theta th = apply_gate(build_theta(st, b), gate);

  // mid charges that can appear
  std::vector<int> qs;
  for (const auto& [k, m] : th) qs.push_back(std::get<0>(k) + std::get<2>(k));
  std::sort(qs.begin(), qs.end());
  qs.erase(std::unique(qs.begin(), qs.end()), qs.end());

  struct Layout {
    std::vector<std::pair<int, Eigen::Index>> rows;  // (i, offset)
    std::vector<std::pair<int, Eigen::Index>> cols;  // (j, offset)
    CMat raw;
    ThinSvd f;
  };
  std::vector<Layout> lay(qs.size());
  std::vector<RVec> values(qs.size());
  for (std::size_t s = 0; s < qs.size(); ++s) {
    const int q = qs[s];
    Layout& l = lay[s];
    Eigen::Index nr = 0, nc = 0;
    for (int i = 0; i < d; ++i)
      if (left.dim(q + i) > 0) {
        l.rows.push_back({i, nr});
        nr += left.dim(q + i);
      }
    for (int j = 0; j < d && j <= q; ++j)
      if (right.dim(q - j) > 0) {
        l.cols.push_back({j, nc});
        nc += right.dim(q - j);
      }
    l.raw = CMat::Zero(nr, nc);
    for (const auto& [i, ro] : l.rows)
      for (const auto& [j, co] : l.cols) {
        auto it = th.find({q - j, i, j});
        if (it == th.end()) continue;
        l.raw.block(ro, co, it->second.rows(), it->second.cols()) = it->second;
      }
    CMat scaled = l.raw;
    for (const auto& [i, ro] : l.rows) {
      const RVec& lam = left.lambda[left.find(q + i)];
      for (Eigen::Index r = 0; r < lam.size(); ++r) scaled.row(ro + r) *= lam[r];
    }
    l.f = svd(scaled);
    values[s] = l.f.s;
  }

  TruncationInfo info;
  const std::vector<int> kept = select_kept(values, qs, st.trunc_rel, st.chi_max, info);
  const double f = 1.0 / info.norm;

  BondSpace mid;
  SiteTensor na, nb;
  for (std::size_t s = 0; s < qs.size(); ++s) {
    const int k = kept[s];
    if (k == 0) continue;
    const int q = qs[s];
    Layout& l = lay[s];
    mid.charges.push_back(q);
    mid.lambda.push_back(l.f.s.head(k) * f);
    const CMat vh = l.f.vh.topRows(k);
    for (const auto& [j, co] : l.cols) nb[{j, q - j}] = vh.middleCols(co, right.dim(q - j));
    const CMat prod = (l.raw * vh.adjoint()) * f;
    for (const auto& [i, ro] : l.rows) na[{i, q}] = prod.middleRows(ro, left.dim(q + i));
  }
  st.bond_raw_mut(b + 1) = std::move(mid);
  st.site_mut(b) = std::move(na);
  st.site_mut(b + 1) = std::move(nb);
  return info;
}

double canonicalize(CanonicalMps& st) {
  const int n = st.n_sites();
  const int d = st.local_dim();
  // left-to-right QR: carry maps old left-bond basis to the new one
  std::map<int, CMat> carry;
  carry[st.total_bosons()] = CMat::Identity(1, 1);
  for (int k = 0; k < n; ++k) {
    SiteTensor& t = st.site_mut(k);
    const BondSpace& rb = st.bond_raw(k + 1);
    SiteTensor out;
    std::map<int, CMat> next;
    BondSpace nb;
    for (std::size_t s = 0; s < rb.charges.size(); ++s) {
      const int qr = rb.charges[s];
      std::vector<std::pair<int, CMat>> parts;
      Eigen::Index rows = 0;
      for (int i = 0; i < d; ++i) {
        auto it = t.find({i, qr});
        auto ic = carry.find(qr + i);
        if (it == t.end() || ic == carry.end() || ic->second.rows() == 0) continue;
        parts.push_back({i, ic->second * it->second});
        rows += parts.back().second.rows();
      }
      if (rows == 0) continue;
      CMat stacked(rows, rb.lambda[s].size());
      Eigen::Index off = 0;
      for (auto& [i, m] : parts) {
        stacked.middleRows(off, m.rows()) = m;
        off += m.rows();
      }
      CMat q, r;
      qr_thin(stacked, q, r);
      off = 0;
      for (auto& [i, m] : parts) {
        out[{i, qr}] = q.middleRows(off, m.rows());
        off += m.rows();
      }
      next[qr] = r;
      nb.charges.push_back(qr);
      nb.lambda.push_back(RVec::Ones(q.cols()));
    }
    t = std::move(out);
    carry = std::move(next);
    if (k + 1 < n) st.bond_raw_mut(k + 1) = std::move(nb);
  }
  auto last = carry.find(0);
  if (last == carry.end() || last->second.size() == 0) throw NumericalError("state has zero norm");
  const cplx r = last->second(0, 0);
  const double norm = std::abs(r);
  if (!(norm > 0.0) || !std::isfinite(norm)) throw NumericalError("state has zero or non-finite norm");
  for (auto& [key, blk] : st.site_mut(n - 1)) blk *= r / norm;

  // right-to-left SVD: carry maps the new right-bond basis into the old one
  std::map<int, CMat> dcarry;
  dcarry[0] = CMat::Identity(1, 1);
  for (int k = n - 1; k >= 1; --k) {
    SiteTensor& t = st.site_mut(k);
    for (auto it = t.begin(); it != t.end();) {
      auto ic = dcarry.find(it->first.second);
      if (ic == dcarry.end()) {
        it = t.erase(it);
        continue;
      }
      it->second = it->second * ic->second;
      ++it;
    }
    const BondSpace& lb = st.bond_raw(k);
    std::vector<int> qs;
    std::vector<ThinSvd> fs;
    std::vector<std::vector<std::pair<int, Eigen::Index>>> cols;
    std::vector<RVec> values;
    for (int ql : lb.charges) {
      std::vector<std::pair<int, Eigen::Index>> c;
      Eigen::Index nc = 0;
      for (int i = 0; i < d && i <= ql; ++i) {
        auto it = t.find({i, ql - i});
        if (it == t.end() || it->second.cols() == 0) continue;
        c.push_back({i, nc});
        nc += it->second.cols();
      }
      if (nc == 0) continue;
      CMat m(lb.dim(ql), nc);
      for (auto& [i, off] : c) {
        const CMat& blk = t.at({i, ql - i});
        m.middleCols(off, blk.cols()) = blk;
      }
      qs.push_back(ql);
      fs.push_back(svd(m));
      values.push_back(fs.back().s);
      cols.push_back(std::move(c));
    }
    TruncationInfo info;
    const std::vector<int> kept = select_kept(values, qs, st.trunc_rel, st.chi_max, info);
    const double f = 1.0 / info.norm;
    SiteTensor out;
    std::map<int, CMat> next;
    BondSpace nb;
    for (std::size_t s = 0; s < qs.size(); ++s) {
      const int kk = kept[s];
      if (kk == 0) continue;
      const int ql = qs[s];
      const CMat vh = fs[s].vh.topRows(kk);
      for (auto& [i, off] : cols[s]) out[{i, ql - i}] = vh.middleCols(off, t.at({i, ql - i}).cols());
      const RVec lam = fs[s].s.head(kk) * f;
      next[ql] = fs[s].u.leftCols(kk) * lam.asDiagonal();
      nb.charges.push_back(ql);
      nb.lambda.push_back(lam);
    }
    t = std::move(out);
    st.bond_raw_mut(k) = std::move(nb);
    dcarry = std::move(next);
  }
  SiteTensor& t0 = st.site_mut(0);
  double w = 0.0;
  for (auto it = t0.begin(); it != t0.end();) {
    auto ic = dcarry.find(it->first.second);
    if (ic == dcarry.end()) {
      it = t0.erase(it);
      continue;
    }
    it->second = it->second * ic->second;
    w += it->second.squaredNorm();
    ++it;
  }
  const double s0 = 1.0 / std::sqrt(w);
  for (auto& [key, blk] : t0) blk *= s0;
  return std::log(norm);
}

std::vector<double> schmidt_spectrum(const CanonicalMps& st, int bond) {
  require(bond >= 0 && bond + 1 < st.n_sites(), "bond out of range");
  const BondSpace& b = st.bond(bond);
  struct E {
    double v;
    int q, i;
  };
  std::vector<E> all;
  for (std::size_t s = 0; s < b.charges.size(); ++s)
    for (Eigen::Index i = 0; i < b.lambda[s].size(); ++i)
      all.push_back({b.lambda[s][i], b.charges[s], static_cast<int>(i)});
  std::sort(all.begin(), all.end(), [](const E& x, const E& y) {
    if (x.v != y.v) return x.v > y.v;
    if (x.q != y.q) return x.q < y.q;
    return x.i < y.i;
  });
  std::vector<double> out;
  for (const auto& e : all) out.push_back(e.v);
  return out;
}

namespace {

double moment(const CanonicalMps& st, int site, int power) {
  require(site >= 0 && site < st.n_sites(), "site out of range");
  const BondSpace& lb = st.bond_raw(site);
  double acc = 0.0;
  for (const auto& [key, blk] : st.site(site)) {
    const int i = key.first;
    if (i == 0) continue;
    const RVec& lam = lb.lambda[lb.find(key.second + i)];
    double w = 0.0;
    for (Eigen::Index r = 0; r < blk.rows(); ++r) w += lam[r] * lam[r] * blk.row(r).squaredNorm();
    acc += std::pow(static_cast<double>(i), power) * w;
  }
  return acc;
}

}  // namespace

double expectation_number(const CanonicalMps& st, int site) { return moment(st, site, 1); }
double expectation_number_sq(const CanonicalMps& st, int site) { return moment(st, site, 2); }

double fluctuation(const CanonicalMps& st, int site) {
  const double n = expectation_number(st, site);
  const double n2 = expectation_number_sq(st, site);
  return std::sqrt(std::max(0.0, n2 - n * n));
}

cplx overlap(const CanonicalMps& a, const CanonicalMps& b) {
  require(a.n_sites() == b.n_sites() && a.total_bosons() == b.total_bosons(), "overlap shape mismatch");
  const int d = a.local_dim();
  std::map<int, CMat> env;
  env[a.total_bosons()] = CMat::Identity(1, 1);
  for (int k = 0; k < a.n_sites(); ++k) {
    std::map<int, CMat> next;
    const SiteTensor& ta = a.site(k);
    const SiteTensor& tb = b.site(k);
    for (const auto& [key, ba] : ta) {
      const int i = key.first, qr = key.second;
      auto ib = tb.find(key);
      auto ie = env.find(qr + i);
      if (ib == tb.end() || ie == env.end()) continue;
      CMat term = ba.adjoint() * ie->second * ib->second;
      auto [it, fresh] = next.try_emplace(qr, term);
      if (!fresh) it->second += term;
    }
    (void)d;
    env = std::move(next);
  }
  auto it = env.find(0);
  return it == env.end() ? cplx(0.0) : it->second(0, 0);
}

double block_entropy(const CanonicalMps& st, int bond) {
  double s = 0.0;
  for (double l : schmidt_spectrum(st, bond)) {
    const double p = l * l;
    if (p > 0.0) s -= p * std::log2(p);
  }
  return std::max(0.0, s);
}

cplx expectation_two_site(const CanonicalMps& st, int b, const TwoSiteGate& op) {
  require(b >= 0 && b + 1 < st.n_sites(), "bond out of range");
  require(op.local_dim() == st.local_dim(), "operator local dimension does not match the state");
  Theta th = build_theta(st, b);
  Theta oth = apply_gate(th, op);
  const BondSpace& left = st.bond_raw(b);
  cplx acc = 0.0;
  for (const auto& [k, m] : th) {
    auto it = oth.find(k);
    if (it == oth.end()) continue;
    const auto [qg, i, j] = k;
    const RVec& lam = left.lambda[left.find(qg + i + j)];
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      acc += lam[r] * lam[r] * m.row(r).conjugate().cwiseProduct(it->second.row(r)).sum();
  }
  return acc;
}

std::uint64_t fock_basis_size(int n_sites, int total_bosons) {
  // C(M + N - 1, N - 1)
  const std::uint64_t n = static_cast<std::uint64_t>(total_bosons + n_sites - 1);
  std::uint64_t k = static_cast<std::uint64_t>(n_sites - 1);
  if (k > n - k) k = n - k;
  long double r = 1.0L;
  for (std::uint64_t i = 1; i <= k; ++i) r = r * static_cast<long double>(n - k + i) / static_cast<long double>(i);
  return static_cast<std::uint64_t>(r + 0.5L);
}

std::vector<std::vector<int>> fock_basis(int n_sites, int total_bosons) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(n_sites, 0);
  auto rec = [&](auto&& self, int k, int left) -> void {
    if (k == n_sites - 1) {
      cur[k] = left;
      out.push_back(cur);
      return;
    }
    for (int n = left; n >= 0; --n) {
      cur[k] = n;
      self(self, k + 1, left - n);
    }
  };
  rec(rec, 0, total_bosons);
  return out;
}

CVec to_dense(const CanonicalMps& st, const DenseLimits& limits) {
  const int n = st.n_sites(), m = st.total_bosons();
  if (fock_basis_size(n, m) > limits.max_basis) throw ResourceError("dense basis exceeds the configured limit");
  const auto basis = fock_basis(n, m);
  CVec out(static_cast<Eigen::Index>(basis.size()));
  for (std::size_t idx = 0; idx < basis.size(); ++idx) {
    const auto& occ = basis[idx];
    CMat v = CMat::Ones(1, 1);
    int q = m;
    bool zero = false;
    for (int k = 0; k < n && !zero; ++k) {
      q -= occ[k];
      auto it = st.site(k).find({occ[k], q});
      if (it == st.site(k).end()) {
        zero = true;
        break;
      }
      v = v * it->second;
    }
    out[static_cast<Eigen::Index>(idx)] = zero ? cplx(0.0) : v(0, 0);
  }
  return out;
}

}  // namespace bchain
