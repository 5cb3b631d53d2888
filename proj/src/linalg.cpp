#include "bchain/linalg.hpp"

#include <cmath>
#include <map>
#include <mutex>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <fftw3.h>
#include <lapacke.h>

#include "bchain/errors.hpp"

namespace bchain {

void check_hermitian(const CMat& a, double tol) {
  if (a.rows() != a.cols()) throw ValidationError("matrix is not square");
  if (a.rows() == 0) throw ValidationError("matrix is empty");
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i <= j; ++i)
      if (std::abs(a(i, j) - std::conj(a(j, i))) > tol)
        throw ValidationError("matrix is not Hermitian");
}

EigenDecomposition eig_hermitian(const CMat& a, double tol) {
  check_hermitian(a, tol);
  const lapack_int n = static_cast<lapack_int>(a.rows());
  EigenDecomposition out;
  out.vectors = a;
  out.values.resize(n);
  lapack_int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'U', n, out.vectors.data(), n,
                                   out.values.data());
  if (info != 0) {
    out.vectors = a;
    info = LAPACKE_zheev(LAPACK_COL_MAJOR, 'V', 'U', n, out.vectors.data(), n, out.values.data());
    if (info != 0) throw NumericalError("Hermitian eigensolver failed to converge");
  }
  return out;
}

CMat expm_hermitian_scaled(const CMat& a, cplx z, double tol) {
  auto e = eig_hermitian(a, tol);
  CVec f(e.values.size());
  for (Eigen::Index k = 0; k < f.size(); ++k) f[k] = std::exp(z * e.values[k]);
  return e.vectors * f.asDiagonal() * e.vectors.adjoint();
}

ThinSvd svd(const CMat& a) {
  ThinSvd out;
  const lapack_int m = static_cast<lapack_int>(a.rows());
  const lapack_int n = static_cast<lapack_int>(a.cols());
  const lapack_int k = std::min(m, n);
  if (k == 0) {
    out.u.resize(m, 0);
    out.s.resize(0);
    out.vh.resize(0, n);
    return out;
  }
  CMat work = a;
  out.u.resize(m, k);
  out.s.resize(k);
  out.vh.resize(k, n);
  lapack_int info = LAPACKE_zgesdd(LAPACK_COL_MAJOR, 'S', m, n, work.data(), m, out.s.data(),
                                   out.u.data(), m, out.vh.data(), k);
  if (info != 0) {
    work = a;
    std::vector<double> superb(k);
    info = LAPACKE_zgesvd(LAPACK_COL_MAJOR, 'S', 'S', m, n, work.data(), m, out.s.data(),
                          out.u.data(), m, out.vh.data(), k, superb.data());
    if (info != 0) throw NumericalError("SVD failed to converge");
  }
  for (Eigen::Index i = 0; i < out.s.size(); ++i)
    if (!std::isfinite(out.s[i])) throw NumericalError("SVD produced non-finite values");
  return out;
}

void qr_thin(const CMat& a, CMat& q, CMat& r) {
  const Eigen::Index m = a.rows(), n = a.cols(), k = std::min(m, n);
  if (k == 0) {
    q.resize(m, 0);
    r.resize(0, n);
    return;
  }
  Eigen::HouseholderQR<CMat> qr(a);
  q = qr.householderQ() * CMat::Identity(m, k);
  r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
}

namespace {

struct PlanPair {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
};

std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

PlanPair plans_for(std::size_t n) {
  static std::map<std::size_t, PlanPair> cache;
  std::lock_guard<std::mutex> lock(plan_mutex());
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::vector<cplx> buf(n);
  auto* p = reinterpret_cast<fftw_complex*>(buf.data());
  PlanPair pp;
  const int ni = static_cast<int>(n);
  pp.fwd = fftw_plan_dft_1d(ni, p, p, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  pp.bwd = fftw_plan_dft_1d(ni, p, p, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  cache.emplace(n, pp);
  return pp;
}

void check_length(std::size_t n) {
  if (n == 0) throw ValidationError("FFT of empty array");
  if ((n & (n - 1)) != 0) throw ValidationError("FFT length must be a power of two");
}

void run(cplx* data, std::size_t n, bool forward) {
  check_length(n);
  PlanPair pp = plans_for(n);
  auto* p = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(forward ? pp.fwd : pp.bwd, p, p);
  const double s = 1.0 / std::sqrt(static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) data[i] *= s;
}

}  // namespace

void fft_ring_inplace(cplx* data, std::size_t n) { run(data, n, true); }
void ifft_ring_inplace(cplx* data, std::size_t n) { run(data, n, false); }

std::vector<cplx> fft_ring(std::span<const cplx> values) {
  std::vector<cplx> out(values.begin(), values.end());
  run(out.data(), out.size(), true);
  return out;
}

std::vector<cplx> ifft_ring(std::span<const cplx> values) {
  std::vector<cplx> out(values.begin(), values.end());
  run(out.data(), out.size(), false);
  return out;
}

}  // namespace bchain
