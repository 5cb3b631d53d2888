#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "bchain/gate.hpp"
#include "bchain/linalg.hpp"

namespace bchain {

// Schmidt basis of one bond grouped by charge. The charge of a Schmidt vector is
// the number of bosons to the right of the bond.
struct BondSpace {
  std::vector<int> charges;   // ascending, unique
  std::vector<RVec> lambda;   // one vector per charge, descending

  int find(int q) const;      // sector index or -1
  int dim(int q) const;       // 0 when absent
  int total() const;
  static BondSpace single(int q);
};

// B^{i} blocks of one site keyed by (i, right charge). Block shape is
// dim(left, qR + i) x dim(right, qR).
using SiteTensor = std::map<std::pair<int, int>, CMat>;

struct TruncationInfo {
  double norm = 1.0;            // norm of the kept weight before renormalization
  double discarded = 0.0;       // discarded sum of squared Schmidt values (relative)
  int kept = 0;
  bool capped = false;          // chi_max was the binding constraint
};


// Vidal form stored with Gamma absorbed into the right lambda (B = Gamma lambda).
// Site k sits between bonds[k] and bonds[k+1]; bonds[0] carries charge M and
// bonds[N] charge 0, both with lambda = 1.
class CanonicalMps {
 public:
  CanonicalMps() = default;

  int n_sites() const { return static_cast<int>(sites_.size()); }
  int total_bosons() const { return m_; }
  int local_dim() const { return m_ + 1; }

  int chi_max = 0;           // 0: no cap
  double trunc_rel = 1e-14;  // drop Schmidt values below trunc_rel * max

  // bond b (0..N-2) joins sites b and b+1
  const BondSpace& bond(int b) const { return bonds_.at(b + 1); }
  const BondSpace& bond_raw(int k) const { return bonds_.at(k); }
  const SiteTensor& site(int k) const { return sites_.at(k); }
  int max_bond_dim() const;

  // Gamma^{[k]} recovered from B by dividing out the right lambda.
  SiteTensor gamma(int k) const;

  // Mutable access for algorithms in this library.
  BondSpace& bond_raw_mut(int k) { return bonds_.at(k); }
  SiteTensor& site_mut(int k) { return sites_.at(k); }

  static CanonicalMps empty(int n_sites, int total_bosons);

 private:
  int m_ = 0;
  std::vector<BondSpace> bonds_;
  std::vector<SiteTensor> sites_;
};

CanonicalMps from_product_fock(const std::vector<int>& occupations);

// Diagonal (number-conserving) unitary on one site.
void apply_one_site(CanonicalMps& state, int site, const CMat& gate, double tol = 1e-10);

// Applies the gate on sites (bond, bond+1), truncates and renormalizes. The
// returned norm is that of the kept weight before renormalization.
TruncationInfo apply_two_site(CanonicalMps& state, int bond, const TwoSiteGate& gate);

// Left QR sweep then right SVD sweep; restores the canonical form and unit norm.
// Returns the natural log of the norm that was divided out.
double canonicalize(CanonicalMps& state);

std::vector<double> schmidt_spectrum(const CanonicalMps& state, int bond);
double expectation_number(const CanonicalMps& state, int site);
double expectation_number_sq(const CanonicalMps& state, int site);
double fluctuation(const CanonicalMps& state, int site);
cplx overlap(const CanonicalMps& a, const CanonicalMps& b);
double block_entropy(const CanonicalMps& state, int bond);

// <op> for a pair-charge conserving operator on sites (bond, bond+1).
cplx expectation_two_site(const CanonicalMps& state, int bond, const TwoSiteGate& op);

// Occupation basis in lexicographically descending order, |M,0,...,0> first.
std::vector<std::vector<int>> fock_basis(int n_sites, int total_bosons);
std::uint64_t fock_basis_size(int n_sites, int total_bosons);

struct DenseLimits {
  std::uint64_t max_basis = 2'000'000;
};

CVec to_dense(const CanonicalMps& state, const DenseLimits& limits = {});

// Checkpoint container: magic + version, then dims, charges, lambdas, blocks.
void save_mps(const CanonicalMps& state, const std::string& path);
CanonicalMps load_mps(const std::string& path);
std::string serialize_mps(const CanonicalMps& state);
CanonicalMps deserialize_mps(const std::string& bytes);

}  // namespace bchain
