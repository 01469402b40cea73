#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "arqmc/density.hpp"
#include "arqmc/error.hpp"
#include "arqmc/point_set.hpp"
#include "arqmc/rng.hpp"

namespace arqmc {

enum class DiscrepancyMode { exact_grid, delta_cover, dense_grid };

/// How a discrepancy is evaluated: "exact", "delta:<d>" or "grid:<res>".
struct ModeSpec {
  DiscrepancyMode kind = DiscrepancyMode::exact_grid;
  double delta = 0.0;
  int resolution = 0;

  static ModeSpec exact() { return {}; }
  static ModeSpec cover(double delta) { return {DiscrepancyMode::delta_cover, delta, 0}; }
  static ModeSpec grid(int resolution) { return {DiscrepancyMode::dense_grid, 0.0, resolution}; }
};

inline std::string to_string(const ModeSpec& m) {
  switch (m.kind) {
    case DiscrepancyMode::exact_grid: return "exact_grid";
    case DiscrepancyMode::delta_cover: return "delta_cover(" + std::to_string(m.delta) + ")";
    case DiscrepancyMode::dense_grid: return "dense_grid_estimate(" + std::to_string(m.resolution) + ")";
  }
  return "?";
}

inline ModeSpec parse_mode(const std::string& text) {
  try {
    if (text == "exact") return ModeSpec::exact();
    if (text.rfind("delta:", 0) == 0) return ModeSpec::cover(std::stod(text.substr(6)));
    if (text.rfind("grid:", 0) == 0) return ModeSpec::grid(std::stoi(text.substr(5)));
  } catch (const std::logic_error&) {
  }
  throw InvalidArgument("unknown discrepancy mode '" + text + "' (expected exact, delta:<d> or grid:<res>)");
}

struct DiscrepancyReport {
  double value = 0.0;
  ModeSpec mode;
  /// |true - value| <= error_radius; guaranteed in exact and delta-cover
  /// modes, the same grid-gap bound in dense-grid mode.
  double error_radius = 0.0;
  bool certified = false;
};

/// Work limits for grid scans.
struct DiscrepancyLimits {
  double max_grid_points = 2.0e8;  // anchors visited in a scan
  double max_brute_work = 2.0e8;   // anchors * N for dimensions >= 3
};

namespace detail {

/// Neumaier compensated sum.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::fabs(sum_) >= std::fabs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Visits every anchor t of the tensor grid axes[0] x ... x axes[d-1]
/// (each axis sorted ascending) with the count of points y satisfying
/// y_j < t_j for all j (or y_j <= t_j when `closed`).
template <class Fn>
void scan_grid(const PointSet& Y, const std::vector<std::vector<double>>& axes, bool closed,
               const DiscrepancyLimits& limits, Fn&& fn) {
  const int d = Y.dim();
  const std::size_t N = Y.size();
  double total = 1.0;
  for (const auto& a : axes) total *= static_cast<double>(a.size());
  if (total > limits.max_grid_points)
    throw CapExceeded("grid of " + std::to_string(total) + " anchors exceeds the cap");
  auto below = [closed](double y, double t) { return closed ? y <= t : y < t; };
  std::vector<double> t(static_cast<std::size_t>(d));

  if (d == 1) {
    auto ys = Y.axis(0);
    std::sort(ys.begin(), ys.end());
    std::size_t k = 0;
    for (double a : axes[0]) {
      while (k < N && below(ys[k], a)) ++k;
      t[0] = a;
      fn(std::as_const(t), static_cast<std::uint64_t>(k));
    }
    return;
  }
  if (d == 2) {
    std::vector<std::pair<double, double>> pts(N);
    for (std::size_t i = 0; i < N; ++i) pts[i] = {Y[i][0], Y[i][1]};
    std::sort(pts.begin(), pts.end());
    const auto& ay = axes[1];
    // hist[j]: added points whose first qualifying y-anchor index is j
    std::vector<std::uint64_t> hist(ay.size() + 1, 0);
    std::size_t k = 0;
    for (double ax : axes[0]) {
      while (k < N && below(pts[k].first, ax)) {
        const double y = pts[k].second;
        const auto it = closed ? std::lower_bound(ay.begin(), ay.end(), y)
                               : std::upper_bound(ay.begin(), ay.end(), y);
        ++hist[static_cast<std::size_t>(it - ay.begin())];
        ++k;
      }
      t[0] = ax;
      std::uint64_t run = 0;
      for (std::size_t j = 0; j < ay.size(); ++j) {
        run += hist[j];
        t[1] = ay[j];
        fn(std::as_const(t), run);
      }
    }
    return;
  }
  if (total * static_cast<double>(N) > limits.max_brute_work)
    throw CapExceeded("brute-force grid scan exceeds the work cap");
  std::vector<std::size_t> idx(static_cast<std::size_t>(d), 0);
  for (;;) {
    for (int j = 0; j < d; ++j) t[j] = axes[j][idx[j]];
    std::uint64_t count = 0;
    for (std::size_t i = 0; i < N; ++i) {
      const auto y = Y[i];
      bool in = true;
      for (int j = 0; j < d && in; ++j) in = below(y[j], t[j]);
      count += in ? 1 : 0;
    }
    fn(std::as_const(t), count);
    int j = 0;
    while (j < d && ++idx[j] == axes[j].size()) idx[j++] = 0;
    if (j == d) break;
  }
}

inline void check_inputs(const PointSet& Y, const Density& psi) {
  if (Y.empty()) throw InvalidArgument("discrepancy of an empty point set");
  if (Y.dim() != psi.dim())
    throw InvalidArgument("point dimension " + std::to_string(Y.dim()) + " != density dimension " +
                          std::to_string(psi.dim()));
}

inline std::vector<double> uniform_axis(int n, bool include_zero) {
  std::vector<double> a;
  for (int i = include_zero ? 0 : 1; i <= n; ++i) a.push_back(static_cast<double>(i) / n);
  return a;
}

}  // namespace detail

/// Anchored-box delta-cover on the tensor grid with per-axis spacing
/// h = 1/ceil(dim/delta): neighbouring anchors x <= y differ in volume by at
/// most 1 - (1-h)^dim <= dim h <= delta.
struct DeltaCover {
  int dim = 1;
  double delta = 1.0;
  std::vector<double> axis;  // shared per-axis grid h, 2h, ..., 1; the empty box at 0 is implicit

  std::uint64_t size() const {
    std::uint64_t n = 1;
    for (int j = 0; j < dim; ++j) n *= axis.size();
    return n;
  }
  /// (2e)^dim (1/delta + 1)^dim
  double cardinality_bound() const {
    return std::pow(2.0 * std::exp(1.0), dim) * std::pow(1.0 / delta + 1.0, dim);
  }
  std::vector<double> anchor(std::uint64_t i) const {
    std::vector<double> x(static_cast<std::size_t>(dim));
    for (int j = 0; j < dim; ++j) {
      x[j] = axis[i % axis.size()];
      i /= axis.size();
    }
    return x;
  }
  /// Cover anchors x <= t <= y with the tightest grid neighbours (x_j = 0
  /// below the first anchor).
  std::pair<std::vector<double>, std::vector<double>> sandwich(std::span<const double> t) const {
    std::vector<double> lo(static_cast<std::size_t>(dim)), hi(static_cast<std::size_t>(dim));
    for (int j = 0; j < dim; ++j) {
      const auto up = std::lower_bound(axis.begin(), axis.end(), t[j]);
      hi[j] = up == axis.end() ? axis.back() : *up;
      const auto down = std::upper_bound(axis.begin(), axis.end(), t[j]);
      lo[j] = down == axis.begin() ? 0.0 : *(down - 1);
    }
    return {lo, hi};
  }
};

inline DeltaCover build_delta_cover(int dim, double delta) {
  if (dim < 1) throw InvalidArgument("delta cover dimension must be >= 1");
  if (!(delta > 0.0) || delta > 1.0) throw InvalidArgument("delta must lie in (0, 1]");
  const int n = static_cast<int>(std::ceil(dim / delta - 1e-12));
  DeltaCover c{dim, delta, detail::uniform_axis(n, false)};
  if (static_cast<double>(c.size()) > c.cardinality_bound())
    throw Error("delta cover cardinality exceeds (2e)^d (1/delta + 1)^d");
  return c;
}

/// sup_t | (1/N) #{y_n in [0,t)} - box_mass(t)/C |.
inline DiscrepancyReport star_discrepancy(const PointSet& Y, const Density& psi,
                                          const ModeSpec& mode = ModeSpec::exact(),
                                          const DiscrepancyLimits& limits = {}) {
  detail::check_inputs(Y, psi);
  const int d = Y.dim();
  const double N = static_cast<double>(Y.size());
  const double C = psi.normalizer();
  DiscrepancyReport rep;
  rep.mode = mode;
  double best = 0.0;

  if (mode.kind == DiscrepancyMode::exact_grid) {
    // the empirical count is constant between sample coordinates and the
    // box mass is monotone, so extremes sit at grid corners: open counts
    // for mass excess, closed counts for count excess
    std::vector<std::vector<double>> axes(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) {
      auto a = Y.axis(j);
      a.push_back(1.0);
      std::sort(a.begin(), a.end());
      a.erase(std::unique(a.begin(), a.end()), a.end());
      axes[j] = std::move(a);
    }
    detail::scan_grid(Y, axes, false, limits, [&](const std::vector<double>& t, std::uint64_t c) {
      best = std::max(best, psi.box_mass(t) / C - static_cast<double>(c) / N);
    });
    detail::scan_grid(Y, axes, true, limits, [&](const std::vector<double>& t, std::uint64_t c) {
      best = std::max(best, static_cast<double>(c) / N - psi.box_mass(t) / C);
    });
    rep.value = best;
    rep.error_radius = psi.mass_kind() == MassKind::exact ? 0.0 : psi.mass_tolerance() / C;
    rep.certified = psi.mass_kind() == MassKind::exact;
    return rep;
  }

  std::vector<double> axis;
  double gap = 0.0;  // volume gap between neighbouring anchors
  if (mode.kind == DiscrepancyMode::delta_cover) {
    const DeltaCover cover = build_delta_cover(d, mode.delta);
    axis = cover.axis;
    gap = mode.delta;
  } else {
    if (mode.resolution < 1) throw InvalidArgument("grid resolution must be >= 1");
    axis = detail::uniform_axis(mode.resolution, false);
    gap = 1.0 - std::pow(1.0 - 1.0 / mode.resolution, d);
  }
  std::vector<std::vector<double>> axes(static_cast<std::size_t>(d), axis);
  detail::scan_grid(Y, axes, false, limits, [&](const std::vector<double>& t, std::uint64_t c) {
    best = std::max(best, std::fabs(static_cast<double>(c) / N - psi.box_mass(t) / C));
  });
  rep.value = best;
  // between anchors x <= t <= y the mass moves by at most L/C * volume gap
  rep.error_radius = gap * psi.bound() / C;
  rep.certified = mode.kind == DiscrepancyMode::delta_cover;
  return rep;
}

/// Closed-form L2 star discrepancy for the uniform density:
/// L2^2 = 3^-d - (2/N) sum_n prod_j (1 - y_nj^2)/2
///        + (1/N^2) sum_{n,m} prod_j (1 - max(y_nj, y_mj)).
inline double warnock_l2(const PointSet& Y) {
  if (Y.empty()) throw InvalidArgument("discrepancy of an empty point set");
  const int d = Y.dim();
  const std::size_t N = Y.size();
  detail::CompensatedSum single, pair;
  for (std::size_t n = 0; n < N; ++n) {
    const auto y = Y[n];
    double p = 1.0;
    for (int j = 0; j < d; ++j) p *= 0.5 * (1.0 - y[j] * y[j]);
    single.add(p);
    for (std::size_t m = 0; m < N; ++m) {
      const auto z = Y[m];
      double q = 1.0;
      for (int j = 0; j < d; ++j) q *= 1.0 - std::max(y[j], z[j]);
      pair.add(q);
    }
  }
  const double Nd = static_cast<double>(N);
  const double sq = std::pow(3.0, -d) - 2.0 / Nd * single.value() + pair.value() / (Nd * Nd);
  return std::sqrt(std::max(0.0, sq));
}

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// L_q norm over t in [0,1]^d of (1/N)#{y_n in [0,t)} - box_mass(t)/C,
/// by the tensor midpoint rule at `resolution` cells per axis. q = inf
/// returns the exact star discrepancy (delta-cover when the exact grid is
/// over the cap).
inline double lq_discrepancy(const PointSet& Y, const Density& psi, double q, int resolution,
                             const DiscrepancyLimits& limits = {}) {
  detail::check_inputs(Y, psi);
  if (!(q >= 2.0)) throw InvalidArgument("L_q discrepancy needs q >= 2 (q < 2 is not supported)");
  if (resolution < 2) throw InvalidArgument("L_q resolution must be >= 2");
  if (std::isinf(q)) {
    try {
      return star_discrepancy(Y, psi, ModeSpec::exact(), limits).value;
    } catch (const CapExceeded&) {
      return star_discrepancy(Y, psi, ModeSpec::cover(1.0 / resolution), limits).value;
    }
  }
  const int d = Y.dim();
  const double N = static_cast<double>(Y.size());
  const double C = psi.normalizer();
  std::vector<double> mid(static_cast<std::size_t>(resolution));
  for (int i = 0; i < resolution; ++i) mid[i] = (i + 0.5) / resolution;
  std::vector<std::vector<double>> axes(static_cast<std::size_t>(d), mid);
  detail::CompensatedSum acc;
  const bool square = q == 2.0;
  detail::scan_grid(Y, axes, false, limits, [&](const std::vector<double>& t, std::uint64_t c) {
    const double local = std::fabs(static_cast<double>(c) / N - psi.box_mass(t) / C);
    acc.add(square ? local * local : std::pow(local, q));
  });
  const double mean = acc.value() / std::pow(static_cast<double>(resolution), d);
  return std::pow(std::max(0.0, mean), 1.0 / q);
}

/// Monte Carlo Minkowski-content estimate of the boundary of A.
struct MinkowskiEstimate {
  /// (eps, lambda(collar)/(2 eps)) with the full two-sided collar, including
  /// the part outside the cube.
  std::vector<std::pair<double, double>> per_eps;
  /// (eps, ...) counting only the collar inside [0,1]^s, which sees half of
  /// every boundary piece lying on the cube surface.
  std::vector<std::pair<double, double>> per_eps_raw;
  double extrapolated = 0.0;
  double extrapolated_raw = 0.0;
  /// A has volume 0 or 1: its boundary inside the open cube is empty.
  bool degenerate = false;
};

/// Intercept at x = 0 of the least-squares line through (x, y).
inline double linear_intercept(const std::vector<std::pair<double, double>>& xy) {
  if (xy.size() == 1) return xy[0].second;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [x, y] : xy) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(xy.size());
  const double den = n * sxx - sx * sx;
  if (den == 0.0) return sy / n;
  const double slope = (n * sxy - sx * sy) / den;
  return (sy - slope * sx) / n;
}

/// Per eps, samples the enlarged box [-eps, 1+eps]^s and marks a sample as
/// lying in the eps-collar of the boundary when membership in A changes at
/// some probe on the spheres of radius eps and eps/2 around it. Probe
/// directions are evenly spaced with a random rotation for s = 2 and random
/// for s >= 3. The collar estimate divided by 2 eps is extrapolated to
/// eps = 0 by a linear fit.
inline MinkowskiEstimate minkowski_content_estimate(const AcceptanceRegion& region,
                                                    const std::vector<double>& eps_list,
                                                    std::uint64_t samples, std::uint64_t seed,
                                                    int directions = 32) {
  if (eps_list.empty()) throw InvalidArgument("eps_list must not be empty");
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    if (!(eps_list[i] > 0.0 && eps_list[i] < 0.5)) throw InvalidArgument("every eps must lie in (0, 0.5)");
    if (i > 0 && !(eps_list[i] < eps_list[i - 1])) throw InvalidArgument("eps_list must be decreasing");
  }
  if (samples < 10000) throw InvalidArgument("minkowski estimate needs at least 1e4 samples");
  const int s = region.dim();
  MinkowskiEstimate out;
  const double vol = region.volume();
  out.degenerate = vol <= 0.0 || vol >= 1.0 - 1e-15;

  std::vector<double> x(static_cast<std::size_t>(s)), probe(static_cast<std::size_t>(s)),
      dir(static_cast<std::size_t>(s));
  auto inside = [&](const std::vector<double>& z) {
    for (double v : z)
      if (v < 0.0 || v > 1.0) return false;
    return region.contains(z);
  };
  constexpr double kTwoPi = 6.283185307179586;
  for (std::size_t e = 0; e < eps_list.size(); ++e) {
    const double eps = eps_list[e];
    const double side = 1.0 + 2.0 * eps;
    std::uint64_t hits = 0, hits_inner = 0;
    for (std::uint64_t n = 0; n < samples; ++n) {
      const std::uint64_t key = mix_key(seed, e, n);
      bool in_cube = true;
      for (int j = 0; j < s; ++j) {
        x[j] = -eps + side * counter_uniform(key, 0, static_cast<std::uint64_t>(j));
        in_cube = in_cube && x[j] >= 0.0 && x[j] <= 1.0;
      }
      const bool here = inside(x);
      bool collar = false;
      const double rot = counter_uniform(key, 1, 0);
      for (int k = 0; k < directions && !collar; ++k) {
        if (s == 2) {
          const double a = kTwoPi * (k + rot) / directions;
          dir[0] = std::cos(a);
          dir[1] = std::sin(a);
        } else {
          double norm = 0.0;
          for (int j = 0; j < s; ++j) {
            // Box-Muller normal coordinates
            const double u1 = std::max(counter_uniform(key, 2 + k, 2 * j), 1e-300);
            const double u2 = counter_uniform(key, 2 + k, 2 * j + 1);
            dir[j] = std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
            norm += dir[j] * dir[j];
          }
          norm = std::sqrt(norm);
          for (int j = 0; j < s; ++j) dir[j] /= norm;
        }
        for (double r : {eps, 0.5 * eps}) {
          for (int j = 0; j < s; ++j) probe[j] = x[j] + r * dir[j];
          if (inside(probe) != here) {
            collar = true;
            break;
          }
        }
      }
      if (collar) {
        ++hits;
        if (in_cube) ++hits_inner;
      }
    }
    const double box_vol = std::pow(side, s);
    const double frac = static_cast<double>(hits) / static_cast<double>(samples);
    const double frac_inner = static_cast<double>(hits_inner) / static_cast<double>(samples);
    out.per_eps.emplace_back(eps, frac * box_vol / (2.0 * eps));
    out.per_eps_raw.emplace_back(eps, frac_inner * box_vol / (2.0 * eps));
  }
  out.extrapolated = linear_intercept(out.per_eps);
  out.extrapolated_raw = linear_intercept(out.per_eps_raw);
  return out;
}

}  // namespace arqmc
