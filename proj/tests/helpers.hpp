#pragma once

#include <random>
#include <vector>

#include "bchain/gate.hpp"
#include "bchain/mps.hpp"
#include "dense_oracle.hpp"

namespace testing {

// Oracle basis order matches the library's to_dense order; convert anyway by labels.
inline oracle::Vec dense_of(const bchain::CanonicalMps& st, const oracle::Basis& b) {
  const auto lib = bchain::fock_basis(st.n_sites(), st.total_bosons());
  const bchain::CVec v = bchain::to_dense(st);
  oracle::Vec out = oracle::Vec::Zero(b.size());
  for (std::size_t i = 0; i < lib.size(); ++i) out[b.index.at(lib[i])] = v[static_cast<Eigen::Index>(i)];
  return out;
}

inline double fidelity(const oracle::Vec& a, const oracle::Vec& b) { return std::norm(a.dot(b)); }

struct Circuit {
  bchain::CanonicalMps mps;
  oracle::Vec dense;
  oracle::Basis basis;
};

// Random number-conserving circuit applied to a Fock product state.
inline Circuit random_circuit(int n, int m, int gates, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<int> occ(n, 0);
  std::uniform_int_distribution<int> site(0, n - 1);
  for (int k = 0; k < m; ++k) ++occ[site(rng)];
  Circuit c;
  c.mps = bchain::from_product_fock(occ);
  c.basis = oracle::make_basis(n, m);
  c.dense = oracle::Vec::Zero(c.basis.size());
  c.dense[c.basis.index.at(occ)] = 1.0;
  const int d = m + 1;
  std::uniform_int_distribution<int> bond(0, n - 2);
  for (int g = 0; g < gates && n > 1; ++g) {
    const oracle::Mat u = oracle::random_pair_unitary(d, rng);
    const int b = bond(rng);
    bchain::apply_two_site(c.mps, b, bchain::TwoSiteGate::from_dense(u, d, 1e-10));
    c.dense = oracle::apply_pair(c.basis, u, b, c.dense);
  }
  return c;
}

}  // namespace testing
