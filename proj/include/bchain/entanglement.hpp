#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "bchain/linalg.hpp"
#include "bchain/mps.hpp"

namespace bchain {

// Reduced state of the two terminal sites. Block Qc (bosons in the bulk) acts on
// the pairs (n1, nN) with n1 + nN = M - Qc, n1 descending.
struct EndPairRdm {
  int total_bosons = 0;
  std::map<int, std::vector<std::pair<int, int>>> labels;
  std::map<int, CMat> blocks;

  double trace() const;
  // rho[(n1,nN),(m1,mN)]; zero outside the block structure
  cplx entry(int n1, int nn, int m1, int mn) const;
};

// Partial transpose on the last site. Block q = n1 - nN of the row label.
struct PartialTransposeRdm {
  std::map<int, std::vector<std::pair<int, int>>> labels;
  std::map<int, CMat> blocks;

  cplx entry(int n1, int nn, int m1, int mn) const;
};

struct RdmBudget {
  std::size_t max_bytes = std::size_t(2) << 30;  // support matrices
};

EndPairRdm end_pair_rdm(const CanonicalMps& state, const RdmBudget& budget = {});
PartialTransposeRdm partial_transpose(const EndPairRdm& rdm);
// Inverse map, back to the charge-block layout.
EndPairRdm partial_transpose_back(const PartialTransposeRdm& pt, int total_bosons);

// log2(1 - 2 sum of negative eigenvalues); |eigenvalue| < 1e-12 is treated as 0.
double log_negativity(const PartialTransposeRdm& pt);
double log_negativity(const EndPairRdm& rdm);

// Shorthand for the end-to-end entanglement of a chain state.
double end_to_end_entanglement(const CanonicalMps& state, const RdmBudget& budget = {});

// (<n_1> + <n_N>) / M
double zeta(const CanonicalMps& state);

// Re tr(a+_1 a_N rho)
double epsilon_ab(const EndPairRdm& rdm);

std::string rdm_json(const EndPairRdm& rdm);

}  // namespace bchain
