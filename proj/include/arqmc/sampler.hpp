#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "arqmc/badic.hpp"
#include "arqmc/density.hpp"
#include "arqmc/driver.hpp"
#include "arqmc/error.hpp"
#include "arqmc/point_set.hpp"

namespace arqmc {

/// Output of one acceptance-rejection pass.
struct ARResult {
  PointSet accepted;   // dimension s, points of the driver that fell in A
  PointSet projected;  // dimension s-1, first s-1 coordinates, same order
  Provenance driver_provenance;
  std::size_t accepted_count = 0;  // N
  std::size_t driver_count = 0;    // M
};

/// Keeps the driver points lying in A = {psi(z_1..z_{s-1}) >= L z_s}, in
/// driver order, and projects them onto the first s-1 coordinates.
inline ARResult accept_reject(const PointSet& driver, const Density& psi) {
  const AcceptanceRegion region(psi);
  if (driver.dim() != region.dim())
    throw InvalidArgument("accept_reject: driver dimension " + std::to_string(driver.dim()) +
                          " != density dimension + 1 = " + std::to_string(region.dim()));
  const std::string tag = to_string(driver.provenance()) + " | " + psi.name();
  ARResult out{PointSet(region.dim(), DerivedSource{"accepted:" + tag}),
               PointSet(psi.dim(), DerivedSource{"projected:" + tag}), driver.provenance(), 0,
               driver.size()};
  for (std::size_t i = 0; i < driver.size(); ++i) {
    const auto z = driver[i];
    if (!region.contains(z)) continue;
    out.accepted.push_back(z);
    out.projected.push_back(z.first(z.size() - 1));
  }
  out.accepted_count = out.accepted.size();
  return out;
}

/// Smallest m with b^m >= ceil(N_target / (C/L)).
inline int choose_m_for_target_N(std::uint64_t N_target, const Density& psi, int b, int max_m = 40) {
  if (N_target < 1) throw InvalidArgument("choose_m_for_target_N: N_target must be >= 1");
  if (b < 2) throw InvalidArgument("choose_m_for_target_N: base must be >= 2");
  const long double ratio = static_cast<long double>(psi.normalizer()) / psi.bound();
  // tolerate representation error such as 100 / 0.5 landing just above 200
  const long double need = std::ceil(static_cast<long double>(N_target) / ratio - 1e-9L);
  long double M = 1;
  for (int m = 0; m <= max_m; ++m) {
    if (M >= need) return m;
    M *= b;
  }
  throw CapExceeded("choose_m_for_target_N: required m exceeds " + std::to_string(max_m));
}

struct CountSandwich {
  bool holds = false;
  double lower = 0.0;
  double upper = 0.0;
};

/// M (lambda(A) -/+ 3 s^{1/2} M_A M^{-1/s}) around the accepted count of a
/// stratified run. Small M may legitimately fall outside; callers decide
/// where to assert.
inline CountSandwich check_count_sandwich(const ARResult& result, const Density& psi,
                                          double minkowski_MA) {
  const auto* st = std::get_if<StratifiedSource>(&result.driver_provenance);
  if (!st) throw InvalidArgument("check_count_sandwich needs a stratified driver");
  const double M = static_cast<double>(st->M);
  const double s = st->s;
  const double lambda = psi.normalizer() / psi.bound();
  const double slack = 3.0 * std::sqrt(s) * minkowski_MA * std::pow(M, -1.0 / s);
  CountSandwich out{false, M * (lambda - slack), M * (lambda + slack)};
  const double N = static_cast<double>(result.accepted_count);
  out.holds = out.lower <= N && N <= out.upper;
  return out;
}

/// Number of the M = g^s stratification cells that straddle the boundary
/// of A, decided by exact per-cell range analysis.
inline std::uint64_t boundary_cell_count(const Density& psi, std::uint64_t g) {
  const int d = psi.dim();
  std::uint64_t base_cells = 1;
  for (int j = 0; j < d; ++j) base_cells *= g;
  if (base_cells * g > (std::uint64_t{1} << 32)) throw CapExceeded("boundary_cell_count: too many cells");
  const double gd = static_cast<double>(g);
  const double L = psi.bound();
  std::vector<double> lo(static_cast<std::size_t>(d)), hi(static_cast<std::size_t>(d));
  std::uint64_t count = 0;
  for (std::uint64_t c = 0; c < base_cells; ++c) {
    std::uint64_t rem = c;
    for (int j = d - 1; j >= 0; --j) {
      const double cj = static_cast<double>(rem % g);
      rem /= g;
      lo[j] = cj / gd;
      hi[j] = (cj + 1.0) / gd;
    }
    const ValueRange r = psi.range(lo, hi);
    // rows [cz/g, (cz+1)/g) straddle iff psi reaches L cz/g and lo/L < (cz+1)/g
    const auto first = static_cast<std::uint64_t>(std::max(0.0, std::floor(r.lo / L * gd)));
    for (std::uint64_t cz = first; cz < g && r.reaches(cz / gd * L); ++cz)
      if (r.lo < (cz + 1.0) / gd * L) ++count;
  }
  return count;
}

}  // namespace arqmc
