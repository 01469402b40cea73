#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "arqmc/error.hpp"

namespace arqmc {

/// b^e in 64-bit integers; throws on overflow.
inline std::uint64_t ipow(std::uint64_t b, int e) {
  std::uint64_t r = 1;
  for (int i = 0; i < e; ++i) {
    if (r > std::numeric_limits<std::uint64_t>::max() / b)
      throw CapExceeded("integer power overflows 64 bits");
    r *= b;
  }
  return r;
}

/// Multiplies x by b^depth and snaps to the nearest integer when the
/// product is within floating representation error of it. Points such as
/// 1/3 stored as a double then get their exact base-3 digits.
inline long double badic_scaled(double x, int base, int depth) {
  const long double scale = std::pow(static_cast<long double>(base), depth);
  const long double v = static_cast<long double>(x) * scale;
  const long double r = std::nearbyint(v);
  const long double tol = 16.0L * scale * std::numeric_limits<double>::epsilon();
  return std::fabs(v - r) <= tol ? r : v;
}

/// Index a of the depth-d b-adic cell [a b^-d, (a+1) b^-d) containing x.
inline std::uint64_t badic_floor(double x, int base, int depth) {
  if (x <= 0.0) return 0;
  const long double v = std::floor(badic_scaled(x, base, depth));
  const long double top = std::pow(static_cast<long double>(base), depth) - 1;
  return static_cast<std::uint64_t>(std::min(v, top));
}

/// Number of depth-d cells whose left end is < x, i.e. ceil(x b^d).
inline std::uint64_t badic_ceil(double x, int base, int depth) {
  if (x <= 0.0) return 0;
  return static_cast<std::uint64_t>(std::ceil(badic_scaled(x, base, depth)));
}

/// First `count` base-b digits of the integer n, least significant first.
inline std::vector<int> digits_lsb(std::uint64_t n, int base, int count) {
  std::vector<int> d(static_cast<std::size_t>(count), 0);
  for (int i = 0; i < count; ++i) {
    d[static_cast<std::size_t>(i)] = static_cast<int>(n % static_cast<std::uint64_t>(base));
    n /= static_cast<std::uint64_t>(base);
  }
  return d;
}

inline bool is_prime(int n) {
  if (n < 2) return false;
  for (int p = 2; p * p <= n; ++p)
    if (n % p == 0) return false;
  return true;
}

}  // namespace arqmc
