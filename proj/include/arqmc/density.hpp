#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "arqmc/badic.hpp"
#include "arqmc/error.hpp"

namespace arqmc {

/// Value range of a density over a half-open box: lo is the infimum, hi the
/// supremum, which the density may only approach (linear on [a, b)).
struct ValueRange {
  double lo = 0.0;
  double hi = 0.0;
  bool hi_attained = true;

  /// Some value in the box is >= v.
  bool reaches(double v) const { return hi_attained ? v <= hi : v < hi; }
};

enum class MassKind { exact, quadrature };

/// Unnormalized target density psi on [0,1]^dim, bounded by L.
///
/// Besides point evaluation a density knows the mass of anchored boxes,
///   box_mass(t) = integral of psi over [0,t),
/// either in closed form or from a fixed midpoint rule, and optionally an
/// exact value range over half-open boxes. The range feeds every boundary
/// incidence decision (covering numbers, boundary cell counts).
///
/// Densities are immutable and cheap to copy; all members are pure.
class Density {
 public:
  using EvalFn = std::function<double(std::span<const double>)>;
  using MassFn = std::function<double(std::span<const double>)>;
  using RangeFn = std::function<ValueRange(std::span<const double>, std::span<const double>)>;

  Density(std::string name, int dim, double bound_L, EvalFn eval, MassFn box_mass,
          double normalizer_C, MassKind kind, double mass_tolerance, RangeFn range = {})
      : name_(std::move(name)),
        dim_(dim),
        bound_(bound_L),
        normalizer_(normalizer_C),
        kind_(kind),
        mass_tolerance_(mass_tolerance),
        eval_(std::move(eval)),
        mass_(std::move(box_mass)),
        range_(std::move(range)) {
    if (dim_ < 1) throw InvalidArgument("density dimension must be >= 1");
    if (!(bound_ > 0.0)) throw InvalidArgument("density bound L must be > 0");
    if (!(normalizer_ > 0.0))
      throw InvalidArgument("density normalizer C must be > 0 (psi vanishes identically)");
    if (normalizer_ > bound_ * (1.0 + 1e-12) + mass_tolerance_)
      throw InvalidArgument("density normalizer C exceeds the bound L");
  }

  const std::string& name() const noexcept { return name_; }
  int dim() const noexcept { return dim_; }
  double bound() const noexcept { return bound_; }
  double normalizer() const noexcept { return normalizer_; }
  MassKind mass_kind() const noexcept { return kind_; }
  double mass_tolerance() const noexcept { return mass_tolerance_; }
  bool has_exact_range() const noexcept { return static_cast<bool>(range_); }

  double operator()(std::span<const double> z) const { return eval_(z); }
  double operator()(double x) const { return eval_(std::span<const double>(&x, 1)); }

  /// Integral of psi over [0,t); coordinates are clamped to [0,1].
  double box_mass(std::span<const double> t) const {
    std::vector<double> c(t.begin(), t.end());
    for (double& v : c) {
      if (!(v > 0.0)) return 0.0;
      v = std::min(v, 1.0);
    }
    return mass_(c);
  }
  double box_mass(double t) const { return box_mass(std::span<const double>(&t, 1)); }

  /// Range of psi over the half-open box [lo, hi). Exact for densities that
  /// provide range analysis; otherwise estimated from a probe grid (see
  /// has_exact_range()). Suprema that are not attained are reported as hi.
  ValueRange range(std::span<const double> lo, std::span<const double> hi) const {
    if (range_) return range_(lo, hi);
    return sampled_range(lo, hi);
  }

 private:
  ValueRange sampled_range(std::span<const double> lo, std::span<const double> hi) const {
    constexpr int kPerAxis = 9;
    const int d = dim_;
    std::vector<double> z(static_cast<std::size_t>(d));
    std::vector<int> idx(static_cast<std::size_t>(d), 0);
    ValueRange r{1e300, -1e300};
    for (;;) {
      for (int j = 0; j < d; ++j) {
        const double f = static_cast<double>(idx[j]) / (kPerAxis - 1);
        // stay inside the half-open box
        z[j] = lo[j] + (hi[j] - lo[j]) * std::min(f, 1.0 - 1e-12);
      }
      const double v = eval_(z);
      r.lo = std::min(r.lo, v);
      r.hi = std::max(r.hi, v);
      int j = 0;
      while (j < d && ++idx[j] == kPerAxis) idx[j++] = 0;
      if (j == d) break;
    }
    return r;
  }

  std::string name_;
  int dim_;
  double bound_;
  double normalizer_;
  MassKind kind_;
  double mass_tolerance_;
  EvalFn eval_;
  MassFn mass_;
  RangeFn range_;
};

namespace density {

/// psi == c on [0,1]^dim, with L = c.
inline Density constant(double c, int dim = 1) {
  if (!(c > 0.0)) throw InvalidArgument("constant density needs c > 0");
  return Density(
      "const:" + std::to_string(c), dim, c, [c](std::span<const double>) { return c; },
      [c](std::span<const double> t) {
        double v = c;
        for (double x : t) v *= x;
        return v;
      },
      c, MassKind::exact, 0.0,
      [c](std::span<const double>, std::span<const double>) { return ValueRange{c, c}; });
}

/// psi(z) = mean of the coordinates of z, so psi(z) = z in one dimension.
/// L = 1 and C = 1/2.
inline Density linear(int dim = 1) {
  const double inv_d = 1.0 / dim;
  auto mean = [inv_d](std::span<const double> z) {
    return std::accumulate(z.begin(), z.end(), 0.0) * inv_d;
  };
  // int_[0,t) mean(z) dz = prod(t) * sum(t) / (2 dim)
  auto mass = [inv_d](std::span<const double> t) {
    double prod = 1.0, sum = 0.0;
    for (double x : t) {
      prod *= x;
      sum += x;
    }
    return 0.5 * prod * sum * inv_d;
  };
  return Density("linear", dim, 1.0, mean, mass, 0.5, MassKind::exact, 0.0,
                 [mean](std::span<const double> lo, std::span<const double> hi) {
                   return ValueRange{mean(lo), mean(hi), false};
                 });
}

/// Largest digit precision p with b^p <= 2^40.
inline int default_digit_precision(int base) {
  int p = 0;
  long double v = 1;
  while (v * base <= 0x1.0p40L) {
    v *= base;
    ++p;
  }
  return p;
}

/// The digit density psi_l(x) = sum_i xi_i b^{-i(l-1)}, where xi_i are the
/// base-b digits of x, truncated after `digit_precision` digits. The
/// truncated function is a step function on depth-p cells and is strictly
/// increasing in the cell index, which gives exact masses and ranges.
/// Truncation error is below b^{-p(l-1)}.
inline Density psi_ell(int base, int ell, int digit_precision = 0) {
  if (base < 2) throw InvalidArgument("psi_ell: base must be >= 2");
  if (ell < 2) throw InvalidArgument("psi_ell: ell must be >= 2");
  const int p = digit_precision > 0 ? digit_precision : std::max(ell, default_digit_precision(base));
  if (p < ell) throw InvalidArgument("psi_ell: digit_precision must be >= ell");
  if (std::pow(static_cast<long double>(base), p) > 0x1.0p52L)
    throw InvalidArgument("psi_ell: b^digit_precision exceeds double resolution");

  struct Table {
    int b;
    int p;
    double r;                      // b^{-(l-1)}
    std::uint64_t cells;           // b^p
    std::vector<double> r_pow;     // r^i, i = 0..p
    std::vector<double> b_inv_pow; // b^{-i}
    std::vector<double> tail;      // tail[i] = sum_{i' = i+1..p} r^{i'}
  };
  auto tab = std::make_shared<Table>();
  tab->b = base;
  tab->p = p;
  tab->r = std::pow(static_cast<double>(base), -(ell - 1));
  tab->cells = ipow(static_cast<std::uint64_t>(base), p);
  tab->r_pow.resize(static_cast<std::size_t>(p) + 1);
  tab->b_inv_pow.resize(static_cast<std::size_t>(p) + 1);
  tab->tail.assign(static_cast<std::size_t>(p) + 1, 0.0);
  for (int i = 0; i <= p; ++i) {
    tab->r_pow[i] = std::pow(tab->r, i);
    tab->b_inv_pow[i] = std::pow(static_cast<double>(base), -i);
  }
  for (int i = p - 1; i >= 0; --i) tab->tail[i] = tab->tail[i + 1] + tab->r_pow[i + 1];

  // value of the step function on cell j
  auto cell_value = [tab](std::uint64_t j) {
    double acc = 0.0;
    for (int i = 0; i < tab->p; ++i) {
      acc = tab->r * (static_cast<double>(j % static_cast<std::uint64_t>(tab->b)) + acc);
      j /= static_cast<std::uint64_t>(tab->b);
    }
    return acc;
  };
  const double C = 0.5 * (base - 1) * tab->tail[0];

  auto eval = [tab, cell_value](std::span<const double> z) {
    const double x = z[0];
    if (x >= 1.0) return cell_value(tab->cells - 1);
    return cell_value(badic_floor(x, tab->b, tab->p));
  };
  // F(t) = sum over cells j < J of value(j) b^-p + value(J) (t - J b^-p),
  // with the cell sum expanded digit by digit (free tails average (b-1)/2).
  auto mass = [tab, cell_value, C](std::span<const double> t) {
    const double x = t[0];
    if (x >= 1.0) return C;
    const std::uint64_t J = badic_floor(x, tab->b, tab->p);
    const auto dig = digits_lsb(J, tab->b, tab->p);
    double F = 0.0, prefix = 0.0;
    for (int i = 1; i <= tab->p; ++i) {
      const double Ji = dig[static_cast<std::size_t>(tab->p - i)];
      F += tab->b_inv_pow[i] * (Ji * prefix + tab->r_pow[i] * Ji * (Ji - 1.0) * 0.5 +
                                Ji * 0.5 * (tab->b - 1) * tab->tail[i]);
      prefix += Ji * tab->r_pow[i];
    }
    const double left = static_cast<double>(static_cast<long double>(J) /
                                            static_cast<long double>(tab->cells));
    F += prefix * std::max(0.0, x - left);
    return F;
  };
  auto range = [tab, cell_value](std::span<const double> lo, std::span<const double> hi) {
    const std::uint64_t first = lo[0] >= 1.0 ? tab->cells - 1 : badic_floor(lo[0], tab->b, tab->p);
    std::uint64_t end = std::min<std::uint64_t>(badic_ceil(hi[0], tab->b, tab->p), tab->cells);
    const std::uint64_t last = end > first ? end - 1 : first;
    return ValueRange{cell_value(first), cell_value(last)};
  };
  return Density("psi_ell:" + std::to_string(base) + ":" + std::to_string(ell), 1, 1.0, eval,
                 mass, C, MassKind::exact, 0.0, range);
}

/// psi scaled by c > 0; L and C scale with it.
inline Density scaled(const Density& d, double c) {
  if (!(c > 0.0)) throw InvalidArgument("scale factor must be > 0");
  Density::RangeFn range;
  if (d.has_exact_range()) {
    range = [d, c](std::span<const double> lo, std::span<const double> hi) {
      const ValueRange r = d.range(lo, hi);
      return ValueRange{c * r.lo, c * r.hi, r.hi_attained};
    };
  }
  return Density(
      d.name() + "*" + std::to_string(c), d.dim(), c * d.bound(),
      [d, c](std::span<const double> z) { return c * d(z); },
      [d, c](std::span<const double> t) { return c * d.box_mass(t); }, c * d.normalizer(),
      d.mass_kind(), c * d.mass_tolerance(), range);
}

/// User density with masses from a tensor midpoint rule at `resolution`
/// cells per axis. Box masses interpolate the cumulative cell table
/// multilinearly, which is exact for the piecewise-constant surrogate and
/// keeps box_mass monotone.
inline Density from_function(std::string name, int dim, double bound_L,
                             std::function<double(std::span<const double>)> fn,
                             int resolution) {
  if (dim < 1) throw InvalidArgument("density dimension must be >= 1");
  if (resolution < 1) throw InvalidArgument("quadrature resolution must be >= 1");
  const auto res = static_cast<std::size_t>(resolution);
  std::size_t total = 1;
  for (int j = 0; j < dim; ++j) {
    total *= res + 1;
    if (total > (std::size_t{1} << 24)) throw CapExceeded("quadrature table too large");
  }
  // cumulative table over (res+1)^dim nodes, node i = sum of cells with index < i
  auto cum = std::make_shared<std::vector<double>>(total, 0.0);
  std::vector<std::size_t> stride(static_cast<std::size_t>(dim));
  std::size_t s = 1;
  for (int j = 0; j < dim; ++j) {
    stride[j] = s;
    s *= res + 1;
  }
  std::vector<double> mid(static_cast<std::size_t>(dim));
  std::vector<std::size_t> idx(static_cast<std::size_t>(dim), 0);
  const double vol = std::pow(1.0 / resolution, dim);
  double vmax = 0.0;
  for (std::size_t n = 0; n < total; ++n) {
    std::size_t rem = n;
    bool interior = true;
    for (int j = 0; j < dim; ++j) {
      idx[j] = rem % (res + 1);
      rem /= res + 1;
      if (idx[j] == res) interior = false;
    }
    if (!interior) continue;
    for (int j = 0; j < dim; ++j) mid[j] = (idx[j] + 0.5) / resolution;
    const double v = fn(mid);
    if (v < 0.0) throw InvalidArgument("density must be nonnegative");
    vmax = std::max(vmax, v);
    std::size_t node = 0;
    for (int j = 0; j < dim; ++j) node += (idx[j] + 1) * stride[j];
    (*cum)[node] = v * vol;
  }
  // prefix sums along every axis
  for (int j = 0; j < dim; ++j) {
    for (std::size_t n = 0; n < total; ++n) {
      const std::size_t coord = (n / stride[j]) % (res + 1);
      if (coord > 0) (*cum)[n] += (*cum)[n - stride[j]];
    }
  }
  auto mass = [cum, stride, dim, resolution](std::span<const double> t) {
    std::vector<std::size_t> base(static_cast<std::size_t>(dim));
    std::vector<double> frac(static_cast<std::size_t>(dim));
    for (int j = 0; j < dim; ++j) {
      const double u = t[j] * resolution;
      const auto i = static_cast<std::size_t>(std::min<double>(std::floor(u), resolution - 1));
      base[j] = i;
      frac[j] = u - static_cast<double>(i);
    }
    double acc = 0.0;
    for (std::size_t corner = 0; corner < (std::size_t{1} << dim); ++corner) {
      double w = 1.0;
      std::size_t node = 0;
      for (int j = 0; j < dim; ++j) {
        const bool up = (corner >> j) & 1U;
        w *= up ? frac[j] : 1.0 - frac[j];
        node += (base[j] + (up ? 1 : 0)) * stride[j];
      }
      if (w != 0.0) acc += w * (*cum)[node];
    }
    return acc;
  };
  std::vector<double> ones(static_cast<std::size_t>(dim), 1.0);
  const double C = mass(ones);
  if (vmax > bound_L * (1.0 + 1e-12)) throw InvalidArgument("density exceeds its bound L");
  return Density(std::move(name), dim, bound_L, std::move(fn), mass, C, MassKind::quadrature,
                 bound_L * dim / resolution);
}

/// Parses "const:<c>", "linear" or "psi_ell:<b>:<ell>"; `dim` applies to
/// const and linear (psi_ell is one-dimensional).
inline Density parse(const std::string& spec, int dim = 1) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = spec.find(':', start);
    parts.push_back(spec.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  try {
    if (parts[0] == "const" && parts.size() == 2) return constant(std::stod(parts[1]), dim);
    if (parts[0] == "linear" && parts.size() == 1) return linear(dim);
    if (parts[0] == "psi_ell" && (parts.size() == 3 || parts.size() == 4)) {
      if (dim != 1) throw InvalidArgument("psi_ell is one-dimensional");
      return psi_ell(std::stoi(parts[1]), std::stoi(parts[2]),
                     parts.size() == 4 ? std::stoi(parts[3]) : 0);
    }
  } catch (const std::logic_error&) {
    throw InvalidArgument("malformed density spec '" + spec + "'");
  }
  throw InvalidArgument("unknown density spec '" + spec +
                        "' (expected const:<c>, linear or psi_ell:<b>:<ell>)");
}

}  // namespace density

/// A = { z in [0,1]^s : psi(z_1..z_{s-1}) >= L z_s }, s = psi.dim + 1.
class AcceptanceRegion {
 public:
  explicit AcceptanceRegion(Density psi) : psi_(std::move(psi)) {}

  const Density& density() const noexcept { return psi_; }
  int dim() const noexcept { return psi_.dim() + 1; }

  /// Ties psi = L z_s are accepted.
  bool contains(std::span<const double> z) const {
    if (static_cast<int>(z.size()) != dim())
      throw InvalidArgument("point dimension " + std::to_string(z.size()) +
                            " does not match region dimension " + std::to_string(dim()));
    return psi_(z.first(z.size() - 1)) >= psi_.bound() * z.back();
  }

  double volume() const noexcept { return psi_.normalizer() / psi_.bound(); }

  /// True iff the half-open box base x [z_lo, z_hi) holds points both inside
  /// and outside A, decided by range analysis of psi over the base.
  bool straddles(std::span<const double> base_lo, std::span<const double> base_hi, double z_lo,
                 double z_hi) const {
    const ValueRange r = psi_.range(base_lo, base_hi);
    const double L = psi_.bound();
    return r.reaches(z_lo * L) && r.lo < z_hi * L;
  }

 private:
  Density psi_;
};

}  // namespace arqmc
