// Compiled with -mavx2 -mfma. Nothing here may run before the dispatcher has
// checked the CPU flags.
#include <immintrin.h>

#include "bchain/kernels.hpp"

namespace bchain::kernels {
namespace {

// Two complex doubles per register: [re0 im0 re1 im1].
inline __m256d mul2(__m256d a, __m256d b) {
  __m256d br = _mm256_movedup_pd(b);          // re re
  __m256d bi = _mm256_permute_pd(b, 0xF);     // im im
  __m256d as = _mm256_permute_pd(a, 0x5);     // im re
  return _mm256_fmaddsub_pd(a, br, _mm256_mul_pd(as, bi));
}

void cmul_v(cplx* a, const cplx* b, std::size_t n) {
  auto* pa = reinterpret_cast<double*>(a);
  auto* pb = reinterpret_cast<const double*>(b);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d va = _mm256_loadu_pd(pa + 2 * i);
    __m256d vb = _mm256_loadu_pd(pb + 2 * i);
    _mm256_storeu_pd(pa + 2 * i, mul2(va, vb));
  }
  for (; i < n; ++i) a[i] *= b[i];
}

cplx cdotc_v(const cplx* a, const cplx* b, std::size_t n) {
  auto* pa = reinterpret_cast<const double*>(a);
  auto* pb = reinterpret_cast<const double*>(b);
  __m256d s_rr = _mm256_setzero_pd();  // accumulates a_re*b_re, a_im*b_im lanes
  __m256d s_ri = _mm256_setzero_pd();  // accumulates a_re*b_im, a_im*b_re lanes
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d va = _mm256_loadu_pd(pa + 2 * i);
    __m256d vb = _mm256_loadu_pd(pb + 2 * i);
    s_rr = _mm256_fmadd_pd(va, vb, s_rr);
    s_ri = _mm256_fmadd_pd(va, _mm256_permute_pd(vb, 0x5), s_ri);
  }
  alignas(32) double rr[4], ri[4];
  _mm256_store_pd(rr, s_rr);
  _mm256_store_pd(ri, s_ri);
  double re = rr[0] + rr[1] + rr[2] + rr[3];
  double im = (ri[0] - ri[1]) + (ri[2] - ri[3]);
  for (; i < n; ++i) {
    re += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
    im += a[i].real() * b[i].imag() - a[i].imag() * b[i].real();
  }
  return {re, im};
}

double norm2_v(const cplx* a, std::size_t n) {
  auto* pa = reinterpret_cast<const double*>(a);
  __m256d s = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d va = _mm256_loadu_pd(pa + 2 * i);
    s = _mm256_fmadd_pd(va, va, s);
  }
  alignas(32) double t[4];
  _mm256_store_pd(t, s);
  double r = (t[0] + t[1]) + (t[2] + t[3]);
  for (; i < n; ++i) r += std::norm(a[i]);
  return r;
}

void axpy_v(cplx alpha, const cplx* x, cplx* y, std::size_t n) {
  auto* px = reinterpret_cast<const double*>(x);
  auto* py = reinterpret_cast<double*>(y);
  const __m256d ar = _mm256_set1_pd(alpha.real());
  const __m256d ai = _mm256_set1_pd(alpha.imag());
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d vx = _mm256_loadu_pd(px + 2 * i);
    __m256d vy = _mm256_loadu_pd(py + 2 * i);
    __m256d xs = _mm256_permute_pd(vx, 0x5);
    __m256d prod = _mm256_fmaddsub_pd(vx, ar, _mm256_mul_pd(xs, ai));
    _mm256_storeu_pd(py + 2 * i, _mm256_add_pd(vy, prod));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void scale_v(double s, cplx* a, std::size_t n) {
  auto* pa = reinterpret_cast<double*>(a);
  const __m256d vs = _mm256_set1_pd(s);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) _mm256_storeu_pd(pa + 2 * i, _mm256_mul_pd(_mm256_loadu_pd(pa + 2 * i), vs));
  for (; i < n; ++i) a[i] *= s;
}

}  // namespace

const Table* avx2_table() {
  static const Table t{"avx2", cmul_v, cdotc_v, norm2_v, axpy_v, scale_v};
  return &t;
}

}  // namespace bchain::kernels
