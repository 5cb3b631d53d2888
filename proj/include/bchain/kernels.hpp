#pragma once

#include <complex>
#include <cstddef>
#include <string>

namespace bchain::kernels {

using cplx = std::complex<double>;

struct Table {
  const char* name;
  void (*cmul)(cplx* a, const cplx* b, std::size_t n);                 // a[i] *= b[i]
  cplx (*cdotc)(const cplx* a, const cplx* b, std::size_t n);          // sum conj(a[i]) b[i]
  double (*norm2)(const cplx* a, std::size_t n);                       // sum |a[i]|^2
  void (*axpy)(cplx alpha, const cplx* x, cplx* y, std::size_t n);     // y += alpha x
  void (*scale)(double s, cplx* a, std::size_t n);                     // a *= s
};

enum class Backend { scalar, avx2 };

const Table& scalar_table();
// Null when the binary was built without AVX2 support.
const Table* avx2_table();

bool cpu_has_avx2();

// Active table. Picks AVX2 when the CPU has AVX2+FMA unless BCHAIN_SIMD=scalar.
const Table& active();
void select(Backend b);  // throws ValidationError if b is unavailable
std::string active_name();

inline void cmul(cplx* a, const cplx* b, std::size_t n) { active().cmul(a, b, n); }
inline cplx cdotc(const cplx* a, const cplx* b, std::size_t n) { return active().cdotc(a, b, n); }
inline double norm2(const cplx* a, std::size_t n) { return active().norm2(a, n); }
inline void axpy(cplx alpha, const cplx* x, cplx* y, std::size_t n) { active().axpy(alpha, x, y, n); }
inline void scale(double s, cplx* a, std::size_t n) { active().scale(s, a, n); }

}  // namespace bchain::kernels
