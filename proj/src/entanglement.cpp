#include "bchain/entanglement.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "json.hpp"

#include "bchain/errors.hpp"

namespace bchain {

namespace {

std::vector<std::pair<int, int>> sum_labels(int total) {
  std::vector<std::pair<int, int>> l;
  for (int n1 = total; n1 >= 0; --n1) l.push_back({n1, total - n1});
  return l;
}

std::vector<std::pair<int, int>> diff_labels(int q, int m) {
  std::vector<std::pair<int, int>> l;
  for (int n1 = m; n1 >= 0; --n1) {
    const int nn = n1 - q;
    if (nn >= 0 && nn <= m) l.push_back({n1, nn});
  }
  return l;
}

int label_index(const std::vector<std::pair<int, int>>& l, int a, int b) {
  for (std::size_t k = 0; k < l.size(); ++k)
    if (l[k].first == a && l[k].second == b) return static_cast<int>(k);
  return -1;
}

}  // namespace

double EndPairRdm::trace() const {
  double t = 0.0;
  for (const auto& [q, b] : blocks) t += b.trace().real();
  return t;
}

cplx EndPairRdm::entry(int n1, int nn, int m1, int mn) const {
  if (n1 + nn != m1 + mn) return 0.0;
  const int qc = total_bosons - n1 - nn;
  auto it = blocks.find(qc);
  if (it == blocks.end()) return 0.0;
  const auto& l = labels.at(qc);
  const int r = label_index(l, n1, nn), c = label_index(l, m1, mn);
  if (r < 0 || c < 0) return 0.0;
  return it->second(r, c);
}

cplx PartialTransposeRdm::entry(int n1, int nn, int m1, int mn) const {
  if (n1 - nn != m1 - mn) return 0.0;
  auto it = blocks.find(n1 - nn);
  if (it == blocks.end()) return 0.0;
  const auto& l = labels.at(n1 - nn);
  const int r = label_index(l, n1, nn), c = label_index(l, m1, mn);
  if (r < 0 || c < 0) return 0.0;
  return it->second(r, c);
}

EndPairRdm end_pair_rdm(const CanonicalMps& st, const RdmBudget& budget) {
  const int n = st.n_sites(), m = st.total_bosons();
  require(n >= 2, "end-pair reduced state needs at least two sites");
  // env (i1, i1', qa) -> matrix over bond charge qa x qa + i1 - i1'
  using Key = std::tuple<int, int, int>;
  std::map<Key, CMat> env;
  const SiteTensor& first = st.site(0);
  for (const auto& [ka, ba] : first)
    for (const auto& [kb, bb] : first) env[{ka.first, kb.first, ka.second}] = ba.transpose() * bb.conjugate();

  auto check_budget = [&](const std::map<Key, CMat>& e) {
    std::size_t bytes = 0;
    for (const auto& [k, mtx] : e) bytes += static_cast<std::size_t>(mtx.size()) * sizeof(cplx);
    if (bytes > budget.max_bytes) throw ResourceError("end-pair support matrices exceed the memory budget");
  };
  check_budget(env);

  for (int k = 1; k + 1 < n; ++k) {
    const SiteTensor& t = st.site(k);
    std::map<Key, CMat> next;
    for (const auto& [key, e] : env) {
      const auto [i1, j1, qa] = key;
      const int delta = i1 - j1;
      for (const auto& [kb, b] : t) {
        const int i = kb.first, qr = kb.second;
        if (qr + i != qa) continue;
        auto ib = t.find({i, qr + delta});
        if (ib == t.end()) continue;
        CMat term = b.transpose() * e * ib->second.conjugate();
        auto [it, fresh] = next.try_emplace(Key{i1, j1, qr}, term);
        if (!fresh) it->second += term;
      }
    }
    env = std::move(next);
    check_budget(env);
  }

  EndPairRdm rdm;
  rdm.total_bosons = m;
  const SiteTensor& last = st.site(n - 1);
  for (const auto& [key, e] : env) {
    const auto [i1, j1, qa] = key;
    // last site: key (iN, 0), left charge iN
    auto ia = last.find({qa, 0});
    auto ib = last.find({qa + i1 - j1, 0});
    if (ia == last.end() || ib == last.end()) continue;
    const int in = qa, jn = qa + i1 - j1;
    const cplx v = (ia->second.transpose() * e * ib->second.conjugate())(0, 0);
    const int qc = m - i1 - in;
    auto lit = rdm.labels.find(qc);
    if (lit == rdm.labels.end()) {
      lit = rdm.labels.emplace(qc, sum_labels(m - qc)).first;
      rdm.blocks[qc] = CMat::Zero(static_cast<Eigen::Index>(lit->second.size()), static_cast<Eigen::Index>(lit->second.size()));
    }
    const int r = label_index(lit->second, i1, in), c = label_index(lit->second, j1, jn);
    rdm.blocks[qc](r, c) += v;
  }
  return rdm;
}

PartialTransposeRdm partial_transpose(const EndPairRdm& rdm) {
  const int m = rdm.total_bosons;
  PartialTransposeRdm pt;
  for (const auto& [qc, blk] : rdm.blocks) {
    const auto& l = rdm.labels.at(qc);
    for (std::size_t r = 0; r < l.size(); ++r)
      for (std::size_t c = 0; c < l.size(); ++c) {
        const cplx v = blk(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
        if (v == cplx(0.0)) continue;
        // rho[(n1,nN'),(m1,nN)] -> eta[(n1,nN),(m1,nN')]
        const int n1 = l[r].first, nnp = l[r].second, m1 = l[c].first, nn = l[c].second;
        const int q = n1 - nn;
        auto lit = pt.labels.find(q);
        if (lit == pt.labels.end()) {
          lit = pt.labels.emplace(q, diff_labels(q, m)).first;
          pt.blocks[q] = CMat::Zero(static_cast<Eigen::Index>(lit->second.size()), static_cast<Eigen::Index>(lit->second.size()));
        }
        pt.blocks[q](label_index(lit->second, n1, nn), label_index(lit->second, m1, nnp)) += v;
      }
  }
  return pt;
}

EndPairRdm partial_transpose_back(const PartialTransposeRdm& pt, int m) {
  EndPairRdm rdm;
  rdm.total_bosons = m;
  for (const auto& [q, blk] : pt.blocks) {
    const auto& l = pt.labels.at(q);
    for (std::size_t r = 0; r < l.size(); ++r)
      for (std::size_t c = 0; c < l.size(); ++c) {
        const cplx v = blk(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
        if (v == cplx(0.0)) continue;
        const int n1 = l[r].first, nn = l[r].second, m1 = l[c].first, nnp = l[c].second;
        // eta[(n1,nN),(m1,nN')] -> rho[(n1,nN'),(m1,nN)]
        const int qc = m - n1 - nnp;
        if (qc < 0) throw ValidationError("partial transpose entry outside the particle budget");
        auto lit = rdm.labels.find(qc);
        if (lit == rdm.labels.end()) {
          lit = rdm.labels.emplace(qc, sum_labels(m - qc)).first;
          rdm.blocks[qc] = CMat::Zero(static_cast<Eigen::Index>(lit->second.size()), static_cast<Eigen::Index>(lit->second.size()));
        }
        rdm.blocks[qc](label_index(lit->second, n1, nnp), label_index(lit->second, m1, nn)) += v;
      }
  }
  return rdm;
}

double log_negativity(const PartialTransposeRdm& pt) {
  double neg = 0.0;
  for (const auto& [q, blk] : pt.blocks) {
    // symmetrize away roundoff before the Hermitian solver
    const CMat h = 0.5 * (blk + blk.adjoint());
    const auto ed = eig_hermitian(h, 1e300);
    for (Eigen::Index k = 0; k < ed.values.size(); ++k) {
      const double l = ed.values[k];
      if (l < 0.0 && std::abs(l) >= 1e-12) neg += l;
    }
  }
  return std::log2(1.0 - 2.0 * neg);
}

double log_negativity(const EndPairRdm& rdm) { return log_negativity(partial_transpose(rdm)); }

double end_to_end_entanglement(const CanonicalMps& st, const RdmBudget& budget) {
  return log_negativity(end_pair_rdm(st, budget));
}

double zeta(const CanonicalMps& st) {
  const int m = st.total_bosons();
  if (m == 0) return 0.0;
  const int n = st.n_sites();
  double ends = expectation_number(st, 0);
  if (n > 1) ends += expectation_number(st, n - 1);
  return std::clamp(ends / m, 0.0, 1.0);
}

double epsilon_ab(const EndPairRdm& rdm) {
  double acc = 0.0;
  for (const auto& [qc, blk] : rdm.blocks) {
    const auto& l = rdm.labels.at(qc);
    for (std::size_t r = 0; r < l.size(); ++r) {
      const int m1 = l[r].first, mn = l[r].second;
      if (mn == 0) continue;
      const int c = label_index(l, m1 + 1, mn - 1);
      if (c < 0) continue;
      acc += std::sqrt(double(m1 + 1) * mn) * blk(static_cast<Eigen::Index>(r), c).real();
    }
  }
  return acc;
}

std::string rdm_json(const EndPairRdm& rdm) {
  nlohmann::json j;
  j["total_bosons"] = rdm.total_bosons;
  j["blocks"] = nlohmann::json::array();
  for (const auto& [qc, blk] : rdm.blocks) {
    nlohmann::json b;
    b["bulk_charge"] = qc;
    b["labels"] = rdm.labels.at(qc);
    std::vector<std::vector<double>> re(blk.rows(), std::vector<double>(blk.cols()));
    auto im = re;
    for (Eigen::Index r = 0; r < blk.rows(); ++r)
      for (Eigen::Index c = 0; c < blk.cols(); ++c) {
        re[r][c] = blk(r, c).real();
        im[r][c] = blk(r, c).imag();
      }
    b["re"] = re;
    b["im"] = im;
    j["blocks"].push_back(b);
  }
  return j.dump(2);
}

}  // namespace bchain
