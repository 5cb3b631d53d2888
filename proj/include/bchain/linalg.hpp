#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace bchain {

using cplx = std::complex<double>;
using CMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic>;
using CVec = Eigen::Matrix<cplx, Eigen::Dynamic, 1>;
using RVec = Eigen::VectorXd;

struct LinalgTolerances {
  double hermitian = 1e-12;  // |a_ij - conj(a_ji)| allowed
};

struct EigenDecomposition {
  RVec values;   // ascending
  CMat vectors;  // columns, orthonormal
};

// Throws ValidationError unless a is square and Hermitian within tol.
void check_hermitian(const CMat& a, double tol = LinalgTolerances{}.hermitian);

EigenDecomposition eig_hermitian(const CMat& a, double tol = LinalgTolerances{}.hermitian);

// V diag(exp(z*lambda)) V^dagger
CMat expm_hermitian_scaled(const CMat& a, cplx z, double tol = LinalgTolerances{}.hermitian);

struct ThinSvd {
  CMat u;   // m x k
  RVec s;   // k, descending
  CMat vh;  // k x n
};

// Thin SVD, k = min(m,n). Empty input gives empty factors.
ThinSvd svd(const CMat& a);

// Thin QR without pivoting; r is k x n with k = min(m,n).
void qr_thin(const CMat& a, CMat& q, CMat& r);

// Unitary DFT on a ring: X_m = L^{-1/2} sum_n x_n exp(-2 pi i m n / L).
std::vector<cplx> fft_ring(std::span<const cplx> values);
std::vector<cplx> ifft_ring(std::span<const cplx> values);

// In-place variants on raw buffers (same normalization). L must be a power of two.
void fft_ring_inplace(cplx* data, std::size_t n);
void ifft_ring_inplace(cplx* data, std::size_t n);

}  // namespace bchain
