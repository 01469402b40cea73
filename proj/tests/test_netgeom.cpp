#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "arqmc/driver.hpp"
#include "arqmc/netgeom.hpp"
#include "arqmc/rng.hpp"
#include "oracles.hpp"

using namespace arqmc;

namespace {

PointSet line(std::vector<double> xs) { return PointSet(1, std::move(xs), DerivedSource{"test"}); }

std::vector<double> anchors(int n) {
  std::vector<double> a;
  for (int i = 0; i < n; ++i) a.push_back((i + 0.5) / n);
  return a;
}

}  // namespace

TEST(Enumerate, SmallFamilies) {
  const auto one = enumerate_elementary_intervals(2, 1, 1);
  ASSERT_EQ(one.size(), 2u);
  EXPECT_EQ(one[0].lo(0), 0.0);
  EXPECT_EQ(one[0].hi(0), 0.5);
  EXPECT_EQ(one[1].lo(0), 0.5);
  EXPECT_EQ(enumerate_elementary_intervals(2, 2, 1).size(), 4u);
  EXPECT_EQ(enumerate_elementary_intervals(2, 2, 2).size(), 12u);
}

TEST(Enumerate, MatchesBruteForceAndPartitionsPerComposition) {
  for (int b : {2, 3})
    for (int s : {1, 2, 3})
      for (int k = 0; k <= 3; ++k) {
        auto fast = enumerate_elementary_intervals(b, s, k);
        auto slow = oracle::all_intervals(b, s, k);
        auto key = [](const ElementaryInterval& e) { return std::pair(e.depths, e.indices); };
        std::set<std::pair<std::vector<int>, std::vector<std::uint64_t>>> a, c;
        for (const auto& e : fast) a.insert(key(e));
        for (const auto& e : slow) c.insert(key(e));
        EXPECT_EQ(a, c) << "b=" << b << " s=" << s << " k=" << k;
        EXPECT_EQ(a.size(), fast.size());
        // each composition's boxes are disjoint and their volumes sum to 1
        for (const auto& comp : compositions(s, k)) {
          std::vector<ElementaryInterval> group;
          for (const auto& e : fast)
            if (e.depths == comp) group.push_back(e);
          EXPECT_EQ(group.size(), ipow(b, k));  // count * b^-k == 1 exactly
          EXPECT_TRUE(pairwise_disjoint(group));
        }
      }
}

TEST(Enumerate, CapIsEnforced) {
  EXPECT_THROW(enumerate_elementary_intervals(2, 3, 20, 1000), CapExceeded);
}

TEST(Fairness, Examples) {
  const PointSet vdc = line({0, 0.5, 0.25, 0.75});
  EXPECT_TRUE(is_fair(vdc, ElementaryInterval{2, {2}, {0}}));
  EXPECT_FALSE(is_fair(line({0, 0.1}), ElementaryInterval{2, {1}, {0}}));
  for (int m = 0; m <= 6; ++m) {
    std::vector<double> xs;
    for (int i = 0; i < (1 << m); ++i) xs.push_back(static_cast<double>(i) / (1 << m));
    const PointSet P = line(xs);
    for (int k = 0; k <= m; ++k)
      for (const auto& J : enumerate_elementary_intervals(2, 1, k)) ASSERT_TRUE(is_fair(P, J));
  }
}

TEST(VerifyNet, Examples) {
  EXPECT_TRUE(verify_net(line({0, 0.5, 0.25, 0.75}), {2, 0, 2, 1}).verified);
  const auto bad = verify_net(line({0, 0.1, 0.2, 0.3}), {2, 0, 2, 1});
  EXPECT_FALSE(bad.verified);
  ASSERT_TRUE(bad.failing_interval.has_value());
  EXPECT_EQ(bad.failing_interval->lo(0), 0.5);
  EXPECT_EQ(bad.failing_interval->hi(0), 1.0);
  EXPECT_EQ(bad.minimal_t, 2);
  for (int s = 1; s <= 3; ++s) {
    const PointSet single(s, std::vector<double>(s, 0.3), DerivedSource{"one"});
    EXPECT_TRUE(verify_net(single, {2, 0, 0, s}).verified);
  }
  EXPECT_THROW(verify_net(line({0, 0.5, 0.25}), {2, 0, 2, 1}), InvalidArgument);
}

TEST(VerifyNet, AgreesWithPerIntervalFairness) {
  // brute check: every interval of order <= m - t is fair
  const NetParams p{3, 0, 3, 3};
  const PointSet P = digital_net(p, NetGenerator::faure);
  for (int k = 0; k <= 3; ++k)
    for (const auto& J : oracle::all_intervals(3, 3, k)) ASSERT_TRUE(is_fair(P, J));
  EXPECT_TRUE(verify_net(P, p).verified);
}

TEST(Covering, ConstantDensityNeedsOneBox) {
  const Density c = density::constant(1.0, 1);
  for (int b : {2, 3})
    for (int k = 0; k <= 6; ++k) {
      const auto r = covering_number(c, b, k, {0.3, 0.7});
      EXPECT_EQ(r.gamma_lower, 1u) << "b=" << b << " k=" << k;
      for (const auto& rep : r.per_anchor) {
        EXPECT_TRUE(rep.disjoint);
        EXPECT_TRUE(rep.covers_boundary);
      }
    }
}

TEST(Covering, OrderZeroIsWholeSquare) {
  const auto r = covering_number(density::linear(1), 2, 0, {0.4});
  EXPECT_EQ(r.gamma_lower, 1u);
  EXPECT_EQ(r.per_anchor[0].intervals[0].order(), 0);
}

TEST(Covering, PsiEllWithinCertifiedBound) {
  const Density p2 = density::psi_ell(2, 2);
  for (int g = 1; g <= 4; ++g) {
    const int k = 2 * g;
    const auto r = covering_number(p2, 2, k, anchors(64));
    EXPECT_LE(static_cast<double>(r.gamma_lower), example1_gamma_bound(2, 2, k)) << "k=" << k;
    for (const auto& rep : r.per_anchor) EXPECT_TRUE(rep.covers_boundary && rep.disjoint);
  }
}

TEST(Covering, MatchesBranchSearchOracle) {
  // generic anchors and continuous densities, so the mixed order-k boxes are
  // exactly those containing a mixed (k, k) cell
  for (const auto& [name, psi] : {std::pair{"linear", density::linear(1)},
                                  std::pair{"const", density::constant(0.7, 1)}}) {
    const AcceptanceRegion A(psi);
    for (auto [b, kmax] : {std::pair{2, 5}, std::pair{3, 3}}) {
      for (int k = 1; k <= kmax; ++k) {
        for (double t : {0.3141, 0.6789, 0.9123}) {
          const TruncatedRegion J(A, t);
          const double n = std::pow(static_cast<double>(b), k);
          // independent mixed test: an interior sample of the fine cell, plus
          // probes hugging the anchor line and the graph of psi
          auto required = [&](std::uint64_t cx, std::uint64_t cy) {
            const double x0 = cx / n, x1 = (cx + 1) / n, y0 = cy / n, y1 = (cy + 1) / n;
            const double eps = 1e-9 / n;
            std::vector<double> xs;
            for (int i = 0; i < 9; ++i) xs.push_back(x0 + (i + 0.5) / 9 / n);
            for (double x : {t - eps, t + eps, x0 + eps, x1 - eps})
              if (x0 <= x && x < x1) xs.push_back(x);
            bool in = false, out = false;
            for (double x : xs) {
              std::vector<double> zs;
              for (int j = 0; j < 9; ++j) zs.push_back(y0 + (j + 0.5) / 9 / n);
              const double g = psi(std::span<const double>(&x, 1)) / psi.bound();
              for (double z : {g - eps, g, g + eps, y0, y1 - eps})
                if (y0 <= z && z < y1) zs.push_back(z);
              for (double zz : zs) {
                const double z[2] = {x, zz};
                (z[0] < t && A.contains(z) ? in : out) = true;
              }
            }
            return in && out;
          };
          const int want = oracle::min_disjoint_cover(b, k, required);
          const auto got = covering_number(psi, b, k, {t});
          EXPECT_EQ(static_cast<int>(got.gamma_lower), want)
              << name << " b=" << b << " k=" << k << " t=" << t;
        }
      }
    }
  }
}

TEST(Covering, LinearGrowsLikeSquareRootOfBoxCount) {
  // gamma_lower <= c b^{(1 - 1/s) k} with s = 2: fitted exponent of b^k near 1/2
  const Density lin = density::linear(1);
  std::vector<double> ks, logs;
  for (int k = 2; k <= 8; ++k) {
    const auto r = covering_number(lin, 2, k, anchors(32));
    ks.push_back(k);
    logs.push_back(std::log2(static_cast<double>(r.gamma_lower)));
  }
  const double mk = std::accumulate(ks.begin(), ks.end(), 0.0) / ks.size();
  const double ml = std::accumulate(logs.begin(), logs.end(), 0.0) / logs.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    sxy += (ks[i] - mk) * (logs[i] - ml);
    sxx += (ks[i] - mk) * (ks[i] - mk);
  }
  const double slope = sxy / sxx;
  EXPECT_GT(slope, 0.3);
  EXPECT_LT(slope, 0.65);
}

TEST(Covering, RefusesWithoutExactRange) {
  auto f = [](std::span<const double> z) { return z[0]; };
  const Density q = density::from_function("q", 1, 1.0, f, 256);
  EXPECT_THROW(covering_number(q, 2, 3, {0.5}), InvalidArgument);
  EXPECT_NO_THROW(covering_number(q, 2, 3, {0.5}, true));
  EXPECT_THROW(covering_number(density::linear(2), 2, 3, {0.5}), InvalidArgument);
}

TEST(DigitDensityCover, HalfAnchorSmallCover) {
  const CoverReport r = example1_cover(2, 2, 1, 0.5);
  EXPECT_LE(r.interval_count, 4u);
  EXPECT_TRUE(r.disjoint);
  EXPECT_TRUE(r.covers_boundary);
}

TEST(DigitDensityCover, ZeroAnchorIsSingleColumn) {
  const CoverReport r = example1_cover(3, 2, 2, 0.0);
  ASSERT_EQ(r.interval_count, 1u);
  EXPECT_EQ(r.intervals[0].depths, (std::vector<int>{6, 0}));
  EXPECT_EQ(r.intervals[0].indices[0], 0u);
}

TEST(DigitDensityCover, RandomAnchorsRespectBounds) {
  CounterRng rng(2024);
  for (int b : {2, 3})
    for (int ell : {2, 3})
      for (int g = 1; g <= 3; ++g)
        for (int i = 0; i < 100; ++i) {
          const double t = rng.uniform();
          const CoverReport r = example1_cover(ell, b, g, t);
          const int k = g * ell;
          ASSERT_TRUE(r.disjoint);
          ASSERT_TRUE(r.covers_boundary) << "b=" << b << " ell=" << ell << " g=" << g << " t=" << t;
          ASSERT_LE(static_cast<double>(r.interval_count), ell * std::pow(b, g));
          ASSERT_LE(static_cast<double>(r.interval_count), example1_gamma_bound(ell, b, k));
          ASSERT_LE(r.interval_count, static_cast<std::size_t>(std::pow(b, g) + b * g * (ell - 1) + 1));
          ASSERT_LE(r.interval_count, example1_gamma_upper(ell, b, k));
        }
}

TEST(DigitDensityCover, NeverBeatsExactMinimum) {
  for (int ell : {2, 3})
    for (int k = 2; k <= 8; ++k)
      for (double t : anchors(16)) {
        const CoverReport ex = example1_cover_order(ell, 2, k, t);
        const auto best = covering_number(density::psi_ell(2, ell), 2, k, {t});
        ASSERT_TRUE(ex.covers_boundary);
        ASSERT_GE(ex.interval_count, best.gamma_lower) << "ell=" << ell << " k=" << k << " t=" << t;
      }
}
