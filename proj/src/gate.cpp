#include "bchain/gate.hpp"

#include "bchain/errors.hpp"

namespace bchain {

TwoSiteGate::TwoSiteGate(int d) : d_(d) {
  require(d >= 1, "local dimension must be positive");
  blocks_.resize(2 * d - 1);
  for (int p = 0; p < n_blocks(); ++p) blocks_[p] = CMat::Identity(block_dim(p), block_dim(p));
}

TwoSiteGate TwoSiteGate::from_dense(const CMat& full, int d, double tol) {
  require(full.rows() == d * d && full.cols() == d * d, "two-site operator must be d^2 x d^2");
  TwoSiteGate g(d);
  for (int r = 0; r < d * d; ++r)
    for (int c = 0; c < d * d; ++c) {
      const int pr = r / d + r % d, pc = c / d + c % d;
      if (pr != pc) {
        if (std::abs(full(r, c)) > tol) throw ValidationError("two-site operator does not conserve pair charge");
        continue;
      }
      g.blocks_[pr](r / d - g.lo(pr), c / d - g.lo(pc)) = full(r, c);
    }
  return g;
}

CMat TwoSiteGate::to_dense() const {
  CMat full = CMat::Zero(d_ * d_, d_ * d_);
  for (int p = 0; p < n_blocks(); ++p)
    for (int a = 0; a < block_dim(p); ++a)
      for (int b = 0; b < block_dim(p); ++b) {
        const int ia = lo(p) + a, ib = lo(p) + b;
        full(ia * d_ + (p - ia), ib * d_ + (p - ib)) = blocks_[p](a, b);
      }
  return full;
}

bool TwoSiteGate::is_unitary(double tol) const {
  for (const auto& b : blocks_) {
    CMat e = b.adjoint() * b - CMat::Identity(b.rows(), b.cols());
    if (e.cwiseAbs().maxCoeff() > tol) return false;
  }
  return true;
}

TwoSiteGate TwoSiteGate::adjoint() const {
  TwoSiteGate g = *this;
  for (auto& b : g.blocks_) b = b.adjoint().eval();
  return g;
}

TwoSiteGate TwoSiteGate::operator*(const TwoSiteGate& rhs) const {
  require(d_ == rhs.d_, "gate dimension mismatch");
  TwoSiteGate g = *this;
  for (int p = 0; p < n_blocks(); ++p) g.blocks_[p] = blocks_[p] * rhs.blocks_[p];
  return g;
}

}  // namespace bchain
