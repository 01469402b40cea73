#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "arqmc/badic.hpp"
#include "arqmc/error.hpp"
#include "arqmc/point_set.hpp"
#include "arqmc/rng.hpp"

namespace arqmc {

namespace detail {

inline std::string ordinal(int n) {
  const int mod100 = n % 100;
  const char* suffix = "th";
  if (mod100 < 11 || mod100 > 13) {
    if (n % 10 == 1) suffix = "st";
    if (n % 10 == 2) suffix = "nd";
    if (n % 10 == 3) suffix = "rd";
  }
  return std::to_string(n) + suffix;
}

/// Largest g with g^s <= M.
inline std::uint64_t integer_root_floor(std::uint64_t M, int s) {
  auto pow_le = [&](std::uint64_t g) {
    // g^s <= M without overflow
    std::uint64_t v = 1;
    for (int i = 0; i < s; ++i) {
      if (v > M / g) return false;
      v *= g;
    }
    return true;
  };
  auto g = static_cast<std::uint64_t>(std::pow(static_cast<long double>(M), 1.0L / s));
  while (g > 1 && !pow_le(g)) --g;
  while (pow_le(g + 1)) ++g;
  return g;
}

}  // namespace detail

/// One point uniformly distributed in each of the M = g^s cells
/// prod_j [c_j/g, (c_j+1)/g). Cells are visited in lexicographic order of
/// (c_1, ..., c_s) with c_1 most significant; the point of cell i depends
/// only on (seed, i).
inline PointSet stratified_points(std::uint64_t M, int s, std::uint64_t seed) {
  if (s < 1) throw InvalidArgument("stratified_points: s must be >= 1");
  if (M == 0) throw InvalidArgument("stratified_points: M must be >= 1");
  const std::uint64_t g = detail::integer_root_floor(M, s);
  if (ipow(g, s) != M) {
    throw InvalidArgument("M must be a perfect " + detail::ordinal(s) +
                          " power; nearest valid: " + std::to_string(ipow(g, s)) + ", " +
                          std::to_string(ipow(g + 1, s)));
  }
  std::vector<double> coords(M * static_cast<std::uint64_t>(s));
  const double gd = static_cast<double>(g);
  for (std::uint64_t i = 0; i < M; ++i) {
    std::uint64_t rem = i;
    for (int j = s - 1; j >= 0; --j) {
      const double c = static_cast<double>(rem % g);
      rem /= g;
      double x = (c + counter_uniform(seed, i, static_cast<std::uint64_t>(j))) / gd;
      const double upper = (c + 1.0) / gd;
      if (x >= upper) x = std::nextafter(upper, 0.0);
      coords[i * s + j] = x;
    }
  }
  return PointSet(s, std::move(coords), StratifiedSource{M, s, seed});
}

/// N independent uniform points in [0,1)^dim.
inline PointSet uniform_points(std::uint64_t N, int dim, std::uint64_t seed) {
  if (N == 0) throw InvalidArgument("uniform_points: N must be >= 1");
  if (dim < 1) throw InvalidArgument("uniform_points: dim must be >= 1");
  std::vector<double> coords(N * static_cast<std::uint64_t>(dim));
  for (std::uint64_t i = 0; i < N; ++i)
    for (int j = 0; j < dim; ++j)
      coords[i * dim + j] = counter_uniform(seed, i, static_cast<std::uint64_t>(j));
  return PointSet(dim, std::move(coords), UniformSource{N, dim, seed});
}

namespace detail {

using Matrix = std::vector<std::vector<int>>;  // m x m over Z_b, row = output digit

inline Matrix identity(int m) {
  Matrix a(m, std::vector<int>(m, 0));
  for (int i = 0; i < m; ++i) a[i][i] = 1;
  return a;
}

/// Maps digits of n to digits of n / b^m read most significant first.
inline Matrix reversal(int m) {
  Matrix a(m, std::vector<int>(m, 0));
  for (int i = 0; i < m; ++i) a[i][m - 1 - i] = 1;
  return a;
}

/// j-th power of the upper triangular Pascal matrix mod b:
/// entry (i, r) = binom(r, i) j^(r-i).
inline Matrix pascal_power(int m, int j, int b) {
  Matrix a(m, std::vector<int>(m, 0));
  std::vector<std::vector<int>> binom(m, std::vector<int>(m, 0));
  for (int r = 0; r < m; ++r) {
    binom[r][0] = 1 % b;
    for (int i = 1; i <= r; ++i) binom[r][i] = (binom[r - 1][i - 1] + (i < r ? binom[r - 1][i] : 0)) % b;
  }
  for (int r = 0; r < m; ++r) {
    long long jp = 1;  // j^(r-i), built for i = r down to 0
    for (int i = r; i >= 0; --i) {
      a[i][r] = static_cast<int>((binom[r][i] * jp) % b);
      jp = (jp * j) % b;
    }
  }
  return a;
}

inline std::vector<Matrix> generator_matrices(const NetParams& p, NetGenerator gen) {
  const int m = p.m;
  std::vector<Matrix> mats;
  if (gen == NetGenerator::van_der_corput) {
    if (p.s == 1) {
      mats.push_back(identity(m));
    } else if (p.s == 2) {
      mats.push_back(reversal(m));
      mats.push_back(identity(m));
    } else {
      throw InvalidArgument("vdc generator supports s = 1 or 2, got s = " + std::to_string(p.s));
    }
    return mats;
  }
  if (!is_prime(p.base))
    throw InvalidArgument("faure generator needs a prime base, got b = " + std::to_string(p.base));
  if (p.s > p.base + 1)
    throw InvalidArgument("faure generator supports s <= b + 1, got s = " + std::to_string(p.s) +
                          " for b = " + std::to_string(p.base));
  // s <= b: Pascal powers 0..s-1; s = b+1: prepend the n/b^m coordinate.
  int pascal_count = p.s;
  if (p.s == p.base + 1) {
    mats.push_back(reversal(m));
    pascal_count = p.base;
  }
  for (int j = 0; j < pascal_count; ++j) mats.push_back(pascal_power(m, j, p.base));
  return mats;
}

}  // namespace detail

/// Digital net with b^m points and the (t,m,s) property claimed by `params`.
/// Supported: vdc with s in {1,2} (any b), faure with prime b and s <= b+1;
/// both give t = 0.
inline PointSet digital_net(const NetParams& params, NetGenerator gen) {
  params.validate();
  if (params.t != 0)
    throw InvalidArgument("supported generators produce t = 0 nets; requested t = " +
                          std::to_string(params.t));
  const auto count = ipow(static_cast<std::uint64_t>(params.base), params.m);
  if (count > (std::uint64_t{1} << 26)) throw CapExceeded("digital_net: b^m exceeds 2^26 points");
  const auto mats = detail::generator_matrices(params, gen);
  const int m = params.m, s = params.s, b = params.base;
  const long double scale = static_cast<long double>(count);
  std::vector<double> coords(count * static_cast<std::uint64_t>(s));
  for (std::uint64_t n = 0; n < count; ++n) {
    const auto dig = digits_lsb(n, b, m);
    for (int j = 0; j < s; ++j) {
      const auto& C = mats[static_cast<std::size_t>(j)];
      // y_i = sum_r C[i][r] n_r; x = sum_i y_i b^{-(i+1)}
      std::uint64_t Y = 0;
      for (int i = 0; i < m; ++i) {
        int acc = 0;
        for (int r = 0; r < m; ++r) acc += C[i][r] * dig[r];
        Y = Y * static_cast<std::uint64_t>(b) + static_cast<std::uint64_t>(acc % b);
      }
      coords[n * s + j] = static_cast<double>(static_cast<long double>(Y) / scale);
    }
  }
  return PointSet(s, std::move(coords), NetSource{params, gen});
}

/// Regenerates a point set from its provenance record.
inline PointSet replay(const Provenance& p) {
  if (const auto* st = std::get_if<StratifiedSource>(&p)) return stratified_points(st->M, st->s, st->seed);
  if (const auto* n = std::get_if<NetSource>(&p)) return digital_net(n->params, n->generator);
  if (const auto* u = std::get_if<UniformSource>(&p)) return uniform_points(u->N, u->dim, u->seed);
  throw InvalidArgument("cannot replay derived provenance '" + to_string(p) + "'");
}

}  // namespace arqmc
