#pragma once

#include <vector>

#include "bchain/linalg.hpp"

namespace bchain {

// Operator on two adjacent sites of local dimension d that conserves the pair
// charge P = i + j. Block P acts on the pairs (i, P - i) with i ascending over
// [lo(P), hi(P)].
class TwoSiteGate {
 public:
  TwoSiteGate() = default;
  explicit TwoSiteGate(int d);  // identity

  int local_dim() const { return d_; }
  int n_blocks() const { return 2 * d_ - 1; }
  int lo(int p) const { return p < d_ ? 0 : p - d_ + 1; }
  int hi(int p) const { return p < d_ ? p : d_ - 1; }
  int block_dim(int p) const { return hi(p) - lo(p) + 1; }

  const CMat& block(int p) const { return blocks_.at(p); }
  CMat& block_mut(int p) { return blocks_.at(p); }

  // full is d^2 x d^2 indexed by i*d + j. Entries coupling different pair
  // charges above tol raise ValidationError.
  static TwoSiteGate from_dense(const CMat& full, int d, double tol = 1e-12);
  CMat to_dense() const;

  bool is_unitary(double tol = 1e-10) const;
  TwoSiteGate adjoint() const;
  TwoSiteGate operator*(const TwoSiteGate& rhs) const;

 private:
  int d_ = 0;
  std::vector<CMat> blocks_;
};

}  // namespace bchain
