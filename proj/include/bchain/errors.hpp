#pragma once

#include <stdexcept>
#include <string>

namespace bchain {

// Bad input: shapes, ranges, non-Hermitian or charge-violating operators.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// NaN, empty spectrum after truncation, resonance divisors, failed factorizations.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Configured size or memory budget exceeded.
struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}

}  // namespace bchain
