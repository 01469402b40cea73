#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "arqmc/badic.hpp"
#include "arqmc/density.hpp"
#include "arqmc/error.hpp"
#include "arqmc/point_set.hpp"

namespace arqmc {

/// prod_i [a_i b^{-d_i}, (a_i+1) b^{-d_i}); order k = sum d_i, volume b^{-k}.
struct ElementaryInterval {
  int base = 2;
  std::vector<int> depths;
  std::vector<std::uint64_t> indices;

  int dim() const noexcept { return static_cast<int>(depths.size()); }
  int order() const noexcept {
    int k = 0;
    for (int d : depths) k += d;
    return k;
  }
  double lo(int j) const {
    return static_cast<double>(static_cast<long double>(indices[j]) /
                               std::pow(static_cast<long double>(base), depths[j]));
  }
  double hi(int j) const {
    return static_cast<double>(static_cast<long double>(indices[j] + 1) /
                               std::pow(static_cast<long double>(base), depths[j]));
  }
  bool contains(std::span<const double> x) const {
    for (int j = 0; j < dim(); ++j)
      if (badic_floor(x[j], base, depths[j]) != indices[j] || x[j] < 0.0 || x[j] >= 1.0)
        return false;
    return true;
  }
  /// True iff every point of `inner` lies in this interval.
  bool contains(const ElementaryInterval& inner) const {
    for (int j = 0; j < dim(); ++j) {
      if (inner.depths[j] < depths[j]) return false;
      if (inner.indices[j] / ipow(base, inner.depths[j] - depths[j]) != indices[j]) return false;
    }
    return true;
  }
  bool disjoint(const ElementaryInterval& o) const {
    for (int j = 0; j < dim(); ++j) {
      const bool mine_coarser = depths[j] <= o.depths[j];
      const int shift = mine_coarser ? o.depths[j] - depths[j] : depths[j] - o.depths[j];
      const std::uint64_t fine = mine_coarser ? o.indices[j] : indices[j];
      const std::uint64_t coarse = mine_coarser ? indices[j] : o.indices[j];
      if (fine / ipow(base, shift) != coarse) return true;
    }
    return false;
  }
  friend bool operator==(const ElementaryInterval&, const ElementaryInterval&) = default;
};

/// All compositions (d_1..d_s) of k into s nonnegative parts, lexicographic.
inline std::vector<std::vector<int>> compositions(int s, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(static_cast<std::size_t>(s), 0);
  auto rec = [&](auto&& self, int pos, int left) -> void {
    if (pos == s - 1) {
      cur[pos] = left;
      out.push_back(cur);
      return;
    }
    for (int d = left; d >= 0; --d) {
      cur[pos] = d;
      self(self, pos + 1, left - d);
    }
  };
  if (s >= 1 && k >= 0) rec(rec, 0, k);
  return out;
}

inline constexpr std::uint64_t kDefaultEnumerationCap = std::uint64_t{1} << 22;

/// Every b-adic elementary interval of order exactly k in [0,1)^s.
inline std::vector<ElementaryInterval> enumerate_elementary_intervals(
    int b, int s, int k, std::uint64_t cap = kDefaultEnumerationCap) {
  if (b < 2) throw InvalidArgument("base must be >= 2");
  if (s < 1) throw InvalidArgument("dimension must be >= 1");
  if (k < 0) throw InvalidArgument("order must be >= 0");
  const auto comps = compositions(s, k);
  const long double count = static_cast<long double>(comps.size()) * std::pow(static_cast<long double>(b), k);
  if (count > static_cast<long double>(cap))
    throw CapExceeded("enumeration of " + std::to_string(static_cast<double>(count)) +
                      " elementary intervals exceeds cap " + std::to_string(cap));
  std::vector<ElementaryInterval> out;
  out.reserve(static_cast<std::size_t>(count));
  for (const auto& d : comps) {
    ElementaryInterval e{b, d, std::vector<std::uint64_t>(static_cast<std::size_t>(s), 0)};
    const std::uint64_t cells = ipow(b, k);
    for (std::uint64_t n = 0; n < cells; ++n) {
      std::uint64_t rem = n;
      for (int j = s - 1; j >= 0; --j) {
        const std::uint64_t w = ipow(b, d[j]);
        e.indices[j] = rem % w;
        rem /= w;
      }
      out.push_back(e);
    }
  }
  return out;
}

/// Exact fairness: #{x_n in J} * b^k == N.
inline bool is_fair(const PointSet& P, const ElementaryInterval& J) {
  if (P.dim() != J.dim())
    throw InvalidArgument("is_fair: point dimension " + std::to_string(P.dim()) +
                          " != interval dimension " + std::to_string(J.dim()));
  std::uint64_t count = 0;
  for (std::size_t i = 0; i < P.size(); ++i) count += J.contains(P[i]) ? 1 : 0;
  const std::uint64_t scale = ipow(J.base, J.order());
  return count * scale == P.size();
}

struct NetVerification {
  bool verified = false;
  std::optional<ElementaryInterval> failing_interval;
  int minimal_t = 0;
};

namespace detail {

/// First non-fair interval of order exactly k, if any. Uses one histogram
/// pass per depth composition.
inline std::optional<ElementaryInterval> first_unfair(const PointSet& P, int b, int k) {
  const int s = P.dim();
  const std::uint64_t N = P.size();
  const std::uint64_t cells = ipow(b, k);
  if (N % cells != 0) {
    // no interval of this order can be fair; report the first one
    ElementaryInterval e{b, compositions(s, k).front(), std::vector<std::uint64_t>(s, 0)};
    return e;
  }
  const std::uint64_t expected = N / cells;
  std::vector<std::uint64_t> hist;
  for (const auto& d : compositions(s, k)) {
    hist.assign(cells, 0);
    for (std::size_t i = 0; i < N; ++i) {
      const auto x = P[i];
      std::uint64_t flat = 0;
      for (int j = 0; j < s; ++j) flat = flat * ipow(b, d[j]) + badic_floor(x[j], b, d[j]);
      ++hist[flat];
    }
    // counts sum to N, so any unfair composition has an underfull cell; report that one
    for (std::uint64_t n = 0; n < cells; ++n) {
      if (hist[n] >= expected) continue;
      ElementaryInterval e{b, d, std::vector<std::uint64_t>(s, 0)};
      std::uint64_t rem = n;
      for (int j = s - 1; j >= 0; --j) {
        const std::uint64_t w = ipow(b, d[j]);
        e.indices[j] = rem % w;
        rem /= w;
      }
      return e;
    }
  }
  return std::nullopt;
}

}  // namespace detail

/// Checks fairness for every elementary interval of order <= m - t, and
/// reports the smallest t' for which the net property holds.
inline NetVerification verify_net(const PointSet& P, const NetParams& params) {
  params.validate();
  if (P.dim() != params.s)
    throw InvalidArgument("verify_net: point dimension " + std::to_string(P.dim()) +
                          " != s = " + std::to_string(params.s));
  const std::uint64_t expected = ipow(params.base, params.m);
  if (P.size() != expected)
    throw InvalidArgument("verify_net: point count " + std::to_string(P.size()) +
                          " != b^m = " + std::to_string(expected));
  NetVerification out;
  // fairness at order k implies fairness at every lower order for b^m points
  int fair_through = params.m;
  std::optional<ElementaryInterval> first_fail;
  for (int k = 0; k <= params.m; ++k) {
    if (auto bad = detail::first_unfair(P, params.base, k)) {
      fair_through = k - 1;
      first_fail = std::move(bad);
      break;
    }
  }
  out.minimal_t = fair_through < 0 ? params.m + 1 : params.m - fair_through;
  out.verified = out.minimal_t <= params.t;
  if (!out.verified) out.failing_interval = first_fail;
  return out;
}

/// Disjoint order-k cover of the interior boundary of J_t^* for one anchor.
struct CoverReport {
  int order_k = 0;
  std::vector<double> anchor_t;
  std::size_t interval_count = 0;
  std::vector<ElementaryInterval> intervals;
  bool disjoint = false;
  bool covers_boundary = false;
};

/// J_t^* = ([0,t) x [0,1]) intersect A for a one-dimensional density
/// (s = 2), with the box-straddling test used by every cover routine.
class TruncatedRegion {
 public:
  TruncatedRegion(const AcceptanceRegion& region, double t) : region_(region), t_(t) {
    if (region.dim() != 2)
      throw InvalidArgument("covering routines support s = 2 (one-dimensional densities)");
  }

  double anchor() const noexcept { return t_; }
  const AcceptanceRegion& region() const noexcept { return region_; }

  /// True iff [x0,x1) x [y0,y1) contains points both in and out of J_t^*.
  bool mixed(double x0, double x1, double y0, double y1) const {
    if (!(x0 < t_)) return false;
    const double L = region_.density().bound();
    const double xe = std::min(x1, t_);
    const ValueRange in_part = region_.density().range(std::span<const double>(&x0, 1),
                                                       std::span<const double>(&xe, 1));
    const bool has_inside = in_part.reaches(y0 * L);
    if (!has_inside) return false;
    if (x1 > t_) return true;
    return in_part.lo < y1 * L;
  }

  bool mixed(const ElementaryInterval& e) const { return mixed(e.lo(0), e.hi(0), e.lo(1), e.hi(1)); }

 private:
  const AcceptanceRegion& region_;
  double t_;
};

namespace detail {

inline std::uint64_t pack_rect(int dx, std::uint64_t ax, int dy, std::uint64_t ay) {
  return (static_cast<std::uint64_t>(dx) << 58) ^ (static_cast<std::uint64_t>(dy) << 52) ^
         (ax << 26) ^ ay;
}

/// Minimal number of mixed pieces over partitions of a rectangle into
/// order-k elementary intervals. A family of pairwise disjoint order-k boxes
/// inside an order-j box (j < k) cannot contain both a full-width and a
/// full-height box, so it splits into the b children along x or along y;
/// the recursion is therefore exact.
class GuillotineCover {
 public:
  GuillotineCover(const TruncatedRegion& J, int b, int k) : J_(J), b_(b), k_(k) {
    if (k > 24) throw CapExceeded("covering order k > 24 is beyond the supported range");
    for (int d = 0; d <= k; ++d) scale_.push_back(std::pow(static_cast<long double>(b), d));
  }

  int solve(int dx, std::uint64_t ax, int dy, std::uint64_t ay) {
    const double x0 = static_cast<double>(ax / scale_[dx]);
    const double x1 = static_cast<double>((ax + 1) / scale_[dx]);
    const double y0 = static_cast<double>(ay / scale_[dy]);
    const double y1 = static_cast<double>((ay + 1) / scale_[dy]);
    if (!J_.mixed(x0, x1, y0, y1)) return 0;
    if (dx + dy == k_) return 1;
    const auto key = pack_rect(dx, ax, dy, ay);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second.cost;
    int split_x = 0, split_y = 0;
    for (int c = 0; c < b_; ++c) split_x += solve(dx + 1, ax * b_ + c, dy, ay);
    for (int c = 0; c < b_; ++c) {
      split_y += solve(dx, ax, dy + 1, ay * b_ + c);
      if (split_y >= split_x) break;
    }
    const bool use_x = split_x <= split_y;
    memo_[key] = Entry{use_x ? split_x : split_y, use_x};
    return use_x ? split_x : split_y;
  }

  void collect(int dx, std::uint64_t ax, int dy, std::uint64_t ay,
               std::vector<ElementaryInterval>& out) {
    const double x0 = static_cast<double>(ax / scale_[dx]);
    const double x1 = static_cast<double>((ax + 1) / scale_[dx]);
    const double y0 = static_cast<double>(ay / scale_[dy]);
    const double y1 = static_cast<double>((ay + 1) / scale_[dy]);
    if (!J_.mixed(x0, x1, y0, y1)) return;
    if (dx + dy == k_) {
      out.push_back(ElementaryInterval{b_, {dx, dy}, {ax, ay}});
      return;
    }
    const bool use_x = memo_.at(pack_rect(dx, ax, dy, ay)).split_x;
    for (int c = 0; c < b_; ++c) {
      if (use_x)
        collect(dx + 1, ax * b_ + c, dy, ay, out);
      else
        collect(dx, ax, dy + 1, ay * b_ + c, out);
    }
  }

 private:
  struct Entry {
    int cost;
    bool split_x;
  };
  const TruncatedRegion& J_;
  int b_;
  int k_;
  std::vector<long double> scale_;
  std::unordered_map<std::uint64_t, Entry> memo_;
};

}  // namespace detail

/// Pairwise disjointness by direct comparison.
inline bool pairwise_disjoint(const std::vector<ElementaryInterval>& v) {
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = i + 1; j < v.size(); ++j)
      if (!v[i].disjoint(v[j])) return false;
  return true;
}

/// Checks that every mixed probe cell of depth (q, q) lies inside one of
/// the intervals, with q = k + 2 capped so that b^q <= 2^20.
inline bool covers_mixed_cells(const TruncatedRegion& J, int b, int k,
                               const std::vector<ElementaryInterval>& cover) {
  int q = k + 2;
  while (q > k && std::pow(static_cast<double>(b), q) > static_cast<double>(1 << 20)) --q;
  const std::uint64_t n = ipow(b, q);
  const long double scale = static_cast<long double>(n);
  // cover lookup keyed by (depth_x, index_x, index_y)
  std::unordered_set<std::uint64_t> keys;
  for (const auto& e : cover) keys.insert(detail::pack_rect(e.depths[0], e.indices[0], e.depths[1], e.indices[1]));
  auto covered = [&](std::uint64_t cx, std::uint64_t cy) {
    for (int dx = 0; dx <= k; ++dx) {
      const int dy = k - dx;
      const std::uint64_t ax = cx / ipow(b, q - dx), ay = cy / ipow(b, q - dy);
      if (keys.count(detail::pack_rect(dx, ax, dy, ay))) return true;
    }
    return false;
  };
  const double L = J.region().density().bound();
  for (std::uint64_t cx = 0; cx < n; ++cx) {
    const double x0 = static_cast<double>(cx / scale), x1 = static_cast<double>((cx + 1) / scale);
    if (!(x0 < J.anchor())) break;
    const double xe = std::min(x1, J.anchor());
    const ValueRange r = J.region().density().range(std::span<const double>(&x0, 1),
                                                    std::span<const double>(&xe, 1));
    // candidate rows: those with y0 <= max psi / L; mixed ones are checked
    const std::uint64_t top = std::min<std::uint64_t>(n - 1, badic_floor(std::min(1.0, r.hi / L), b, q));
    const std::uint64_t bottom = x1 > J.anchor() ? 0 : badic_floor(std::min(1.0, r.lo / L), b, q);
    for (std::uint64_t cy = bottom; cy <= top; ++cy) {
      const double y0 = static_cast<double>(cy / scale), y1 = static_cast<double>((cy + 1) / scale);
      if (J.mixed(x0, x1, y0, y1) && !covered(cx, cy)) return false;
    }
  }
  return true;
}

struct CoveringResult {
  std::size_t gamma_lower = 0;
  std::vector<CoverReport> per_anchor;
};

/// Minimal disjoint order-k cover per anchor; gamma_lower is the maximum
/// over the anchor grid, a lower bound for the supremum over all anchors.
/// Densities without exact range analysis are refused unless
/// `allow_heuristic` is set.
inline CoveringResult covering_number(const Density& psi, int b, int k,
                                      const std::vector<double>& anchor_grid,
                                      bool allow_heuristic = false) {
  if (psi.dim() != 1)
    throw InvalidArgument("covering_number supports one-dimensional densities (s = 2)");
  if (b < 2) throw InvalidArgument("base must be >= 2");
  if (k < 0) throw InvalidArgument("order must be >= 0");
  if (static_cast<long double>(k + 1) * std::pow(static_cast<long double>(b), k) >
      static_cast<long double>(kDefaultEnumerationCap))
    throw CapExceeded("order-" + std::to_string(k) + " family exceeds the enumeration cap");
  if (!psi.has_exact_range() && !allow_heuristic)
    throw InvalidArgument("density '" + psi.name() +
                          "' has no exact range analysis; pass allow_heuristic for a sampled range");
  const AcceptanceRegion region(psi);
  CoveringResult out;
  for (double t : anchor_grid) {
    const TruncatedRegion J(region, t);
    detail::GuillotineCover solver(J, b, k);
    CoverReport rep;
    rep.order_k = k;
    rep.anchor_t = {t};
    rep.interval_count = static_cast<std::size_t>(solver.solve(0, 0, 0, 0));
    if (rep.interval_count > 0) solver.collect(0, 0, 0, 0, rep.intervals);
    rep.disjoint = pairwise_disjoint(rep.intervals);
    rep.covers_boundary = covers_mixed_cells(J, b, k, rep.intervals);
    out.gamma_lower = std::max(out.gamma_lower, rep.interval_count);
    out.per_anchor.push_back(std::move(rep));
  }
  return out;
}

/// Explicit cover of the order g*l boundary of J_t^* for psi_l: base boxes
/// over the full depth-g cells left of t, boxes along the digit path of t,
/// and the column of t. Box counts are at most b^g + (b-1) g (l-1) + 1.
inline CoverReport example1_cover(int ell, int b, int g, double t) {
  if (ell < 2) throw InvalidArgument("example1_cover: ell must be >= 2");
  if (b < 2) throw InvalidArgument("example1_cover: base must be >= 2");
  if (g < 0) throw InvalidArgument("example1_cover: g must be >= 0");
  if (!(t >= 0.0 && t < 1.0)) throw InvalidArgument("example1_cover: anchor must lie in [0,1)");
  const int k = g * ell;
  if (std::pow(static_cast<long double>(b), k) > 0x1.0p52L)
    throw InvalidArgument("example1_cover: anchor has fewer than g*l representable digits");
  const std::uint64_t Tk = badic_floor(t, b, k);
  const auto tdig_lsb = digits_lsb(Tk, b, k);
  auto tdigit = [&](int i) { return static_cast<std::uint64_t>(tdig_lsb[static_cast<std::size_t>(k - i)]); };
  auto prefix = [&](int i) { return Tk / ipow(b, k - i); };  // t_1..t_i as an integer

  CoverReport rep;
  rep.order_k = k;
  rep.anchor_t = {t};
  const int ydepth = g * (ell - 1);
  // depth-g cells entirely left of t
  const std::uint64_t full = prefix(g);
  for (std::uint64_t A = 0; A < full; ++A) {
    const auto a = digits_lsb(A, b, g);  // a_g first
    std::uint64_t Y = 0;
    for (int i = 1; i <= g; ++i) Y += static_cast<std::uint64_t>(a[static_cast<std::size_t>(g - i)]) * ipow(b, (g - i) * (ell - 1));
    rep.intervals.push_back(ElementaryInterval{b, {g, ydepth}, {A, Y}});
  }
  // cells sharing t's first g+u-1 digits with a smaller digit at g+u; the
  // graph's leading y-digits there are t_{i/(l-1)} at positions divisible by l-1
  for (int u = 1; u <= ydepth; ++u) {
    const int D = ydepth - u;
    std::uint64_t Y = 0;
    for (int i = 1; i <= D; ++i) {
      const std::uint64_t di = (i % (ell - 1) == 0) ? tdigit(i / (ell - 1)) : 0;
      Y = Y * b + di;
    }
    for (std::uint64_t c = 0; c < tdigit(g + u); ++c)
      rep.intervals.push_back(ElementaryInterval{b, {g + u, D}, {prefix(g + u - 1) * b + c, Y}});
  }
  rep.intervals.push_back(ElementaryInterval{b, {k, 0}, {Tk, 0}});
  rep.interval_count = rep.intervals.size();
  rep.disjoint = pairwise_disjoint(rep.intervals);
  const AcceptanceRegion region(density::psi_ell(b, ell));
  rep.covers_boundary = covers_mixed_cells(TruncatedRegion(region, t), b, k, rep.intervals);
  return rep;
}

/// Order-k version for any k: the order g*l cover with g = floor(k/l),
/// each box split along x into b^{k - g l} order-k boxes.
inline CoverReport example1_cover_order(int ell, int b, int k, double t) {
  const int g = k / ell;
  const int extra = k - g * ell;
  CoverReport base = example1_cover(ell, b, g, t);
  if (extra == 0) return base;
  CoverReport rep;
  rep.order_k = k;
  rep.anchor_t = base.anchor_t;
  const std::uint64_t parts = ipow(b, extra);
  for (const auto& e : base.intervals)
    for (std::uint64_t c = 0; c < parts; ++c)
      rep.intervals.push_back(ElementaryInterval{b, {e.depths[0] + extra, e.depths[1]}, {e.indices[0] * parts + c, e.indices[1]}});
  rep.interval_count = rep.intervals.size();
  rep.disjoint = pairwise_disjoint(rep.intervals);
  const AcceptanceRegion region(density::psi_ell(b, ell));
  rep.covers_boundary = covers_mixed_cells(TruncatedRegion(region, t), b, k, rep.intervals);
  return rep;
}

/// Supremum over anchors of the explicit cover size at order k:
/// b^{k - g l} (b^g + (b-1) g (l-1)), g = floor(k/l).
inline std::uint64_t example1_gamma_upper(int ell, int b, int k) {
  const int g = k / ell;
  return ipow(b, k - g * ell) *
         (ipow(b, g) + static_cast<std::uint64_t>((b - 1) * g * (ell - 1)));
}

/// l b^{k/l + l - 1}.
inline double example1_gamma_bound(int ell, int b, int k) {
  return ell * std::pow(static_cast<double>(b), static_cast<double>(k) / ell + ell - 1);
}

}  // namespace arqmc
