#include <gtest/gtest.h>

#include <cmath>

#include "arqmc/discrepancy.hpp"
#include "arqmc/driver.hpp"
#include "arqmc/sampler.hpp"
#include "oracles.hpp"

using namespace arqmc;

namespace {

PointSet pts(int dim, std::vector<double> c) { return PointSet(dim, std::move(c), DerivedSource{"test"}); }

}  // namespace

TEST(Star, OnePointAtHalf) {
  const auto r = star_discrepancy(pts(1, {0.5}), density::constant(1.0, 1));
  EXPECT_DOUBLE_EQ(r.value, 0.5);
  EXPECT_TRUE(r.certified);
  EXPECT_EQ(r.error_radius, 0.0);
}

TEST(Star, CenteredGrid) {
  for (int N : {1, 4, 10, 64}) {
    std::vector<double> c;
    for (int i = 0; i < N; ++i) c.push_back((i + 0.5) / N);
    EXPECT_NEAR(star_discrepancy(pts(1, c), density::constant(1.0, 1)).value, 0.5 / N, 1e-15);
  }
}

TEST(Star, NetDrivenOutputMatchesDenseOracle) {
  const PointSet net = digital_net({2, 0, 5, 2}, NetGenerator::faure);
  const ARResult ar = accept_reject(net, density::linear(1));
  ASSERT_GE(ar.accepted_count, 12u);
  const Density lin = density::linear(1);
  const double exact = star_discrepancy(ar.projected, lin).value;
  // dense grid at 10^4 misses at most the mass of one 10^-4 slab under psi / C
  EXPECT_NEAR(exact, oracle::star_dense(ar.projected, lin, 10000), 2e-4);
  EXPECT_GE(exact, oracle::star_dense(ar.projected, lin, 10000) - 1e-15);
}

TEST(Star, ExactMatchesBruteForceOracle) {
  CounterRng rng(8);
  const std::vector<Density> dens{density::constant(1.0, 2), density::linear(2)};
  for (int trial = 0; trial < 20; ++trial) {
    const int N = 1 + static_cast<int>(rng.uniform() * 40);
    for (int d : {1, 2, 3}) {
      const PointSet Y = uniform_points(N, d, 1000 + trial);
      const Density psi = trial % 2 ? density::linear(d) : density::constant(1.0, d);
      EXPECT_NEAR(star_discrepancy(Y, psi).value, oracle::star_brute(Y, psi), 1e-12)
          << "d=" << d << " N=" << N;
    }
  }
}

TEST(Star, TiesAndRepeatedCoordinates) {
  const PointSet Y = pts(2, {0.5, 0.5, 0.5, 0.5, 0.25, 0.75, 0.0, 0.0});
  const Density c = density::constant(1.0, 2);
  EXPECT_NEAR(star_discrepancy(Y, c).value, oracle::star_brute(Y, c), 1e-15);
}

TEST(Star, PsiEllExactMass) {
  const Density p3 = density::psi_ell(2, 3);
  const PointSet Y = uniform_points(50, 1, 4);
  EXPECT_NEAR(star_discrepancy(Y, p3).value, oracle::star_brute(Y, p3), 1e-12);
}

TEST(Star, DenseGridNeverExceedsExact) {
  const Density lin = density::linear(2);
  const PointSet Y = uniform_points(30, 2, 12);
  const double exact = star_discrepancy(Y, lin).value;
  double prev_gap = 1.0;
  for (int res : {10, 100, 1000}) {
    const auto g = star_discrepancy(Y, lin, ModeSpec::grid(res));
    EXPECT_LE(g.value, exact + 1e-15);
    EXPECT_LE(exact - g.value, g.error_radius + 1e-15);
    EXPECT_LE(exact - g.value, prev_gap + 1e-15);
    prev_gap = exact - g.value;
    EXPECT_FALSE(g.certified);
  }
}

TEST(Star, DeltaCoverWithinRadius) {
  for (int d : {1, 2}) {
    const Density psi = density::linear(d);
    const PointSet Y = uniform_points(40, d, 3);
    const double exact = star_discrepancy(Y, psi).value;
    for (double delta : {0.5, 0.1, 0.02}) {
      const auto r = star_discrepancy(Y, psi, ModeSpec::cover(delta));
      EXPECT_TRUE(r.certified);
      EXPECT_DOUBLE_EQ(r.error_radius, delta * psi.bound() / psi.normalizer());
      EXPECT_LE(std::fabs(r.value - exact), r.error_radius) << "d=" << d << " delta=" << delta;
    }
  }
}

TEST(Star, ScaleInvariance) {
  const PointSet Y = uniform_points(25, 1, 6);
  const Density lin = density::linear(1);
  EXPECT_NEAR(star_discrepancy(Y, lin).value, star_discrepancy(Y, density::scaled(lin, 7.5)).value, 1e-14);
}

TEST(Star, Errors) {
  EXPECT_THROW(star_discrepancy(PointSet(1, DerivedSource{"e"}), density::linear(1)), InvalidArgument);
  EXPECT_THROW(star_discrepancy(uniform_points(4, 2, 0), density::linear(1)), InvalidArgument);
  DiscrepancyLimits tiny;
  tiny.max_grid_points = 10;
  EXPECT_THROW(star_discrepancy(uniform_points(40, 2, 0), density::linear(2), ModeSpec::exact(), tiny),
               CapExceeded);
  EXPECT_THROW(parse_mode("fast"), InvalidArgument);
}

TEST(DeltaCover, Examples) {
  const DeltaCover half = build_delta_cover(1, 0.5);
  EXPECT_EQ(half.axis, (std::vector<double>{0.5, 1.0}));
  EXPECT_LE(static_cast<double>(half.size()), 2 * std::exp(1.0) * 3);
  const DeltaCover tenth = build_delta_cover(1, 0.1);
  EXPECT_LE(tenth.size(), 11u);
  EXPECT_LE(build_delta_cover(2, 0.25).cardinality_bound(), 2 * 2 * std::exp(2.0) * 25 + 1e-9);
  EXPECT_THROW(build_delta_cover(1, 0.0), InvalidArgument);
  EXPECT_THROW(build_delta_cover(0, 0.5), InvalidArgument);
}

TEST(DeltaCover, SandwichOnRandomProbes) {
  CounterRng rng(31);
  for (int d : {1, 2, 3})
    for (double delta : {0.5, 0.25, 0.1, 0.02}) {
      const DeltaCover c = build_delta_cover(d, delta);
      EXPECT_LE(static_cast<double>(c.size()), c.cardinality_bound());
      std::vector<double> t(d);
      for (int i = 0; i < 1000; ++i) {
        for (auto& v : t) v = rng.uniform();
        const auto [lo, hi] = c.sandwich(t);
        double vlo = 1, vhi = 1;
        for (int j = 0; j < d; ++j) {
          ASSERT_LE(lo[j], t[j]);
          ASSERT_GE(hi[j], t[j]);
          vlo *= lo[j];
          vhi *= hi[j];
        }
        ASSERT_LE(vhi - vlo, delta + 1e-12);
      }
    }
}

TEST(Lq, OnePointAtZero) {
  const double v = lq_discrepancy(pts(1, {0.0}), density::constant(1.0, 1), 2, 1 << 16);
  EXPECT_NEAR(v, 1.0 / std::sqrt(3.0), 1e-6);
  EXPECT_NEAR(warnock_l2(pts(1, {0.0})), 1.0 / std::sqrt(3.0), 1e-15);
}

TEST(Lq, InfinityIsStar) {
  EXPECT_DOUBLE_EQ(lq_discrepancy(pts(1, {0.5}), density::constant(1.0, 1), kInfinity, 16), 0.5);
}

TEST(Lq, MidpointMatchesWarnock) {
  for (int d : {1, 2}) {
    const PointSet Y = uniform_points(32, d, 77);
    const int res = d == 1 ? 1 << 12 : 1 << 10;
    EXPECT_NEAR(lq_discrepancy(Y, density::constant(1.0, d), 2, res), warnock_l2(Y), 1e-3) << "d=" << d;
  }
}

TEST(Lq, NormOrdering) {
  for (int d : {1, 2}) {
    const PointSet Y = uniform_points(20, d, 5);
    const Density u = density::constant(1.0, d);
    const double l2 = lq_discrepancy(Y, u, 2, 512), l4 = lq_discrepancy(Y, u, 4, 512);
    const double linf = star_discrepancy(Y, u).value;
    EXPECT_LE(l2, l4 + 1e-12);
    EXPECT_LE(l4, linf + 1e-12);
  }
}

TEST(Lq, RejectsSmallQAndResolution) {
  const PointSet Y = pts(1, {0.5});
  EXPECT_THROW(lq_discrepancy(Y, density::constant(1.0, 1), 1.5, 64), InvalidArgument);
  EXPECT_THROW(lq_discrepancy(Y, density::constant(1.0, 1), 2, 1), InvalidArgument);
}

TEST(Minkowski, TrianglePerimeter) {
  const auto e = minkowski_content_estimate(AcceptanceRegion(density::linear(1)), {0.04, 0.02, 0.01},
                                            200000, 9);
  EXPECT_NEAR(e.extrapolated, 2.0 + std::sqrt(2.0), 0.05 * (2.0 + std::sqrt(2.0)));
  EXPECT_FALSE(e.degenerate);
  EXPECT_EQ(e.per_eps.size(), 3u);
  // cube-face pieces are only half visible in the raw estimate
  EXPECT_LT(e.extrapolated_raw, e.extrapolated);
}

TEST(Minkowski, CubeSurfaceIsDegenerate) {
  for (int s : {2, 3}) {
    const auto e = minkowski_content_estimate(AcceptanceRegion(density::constant(1.0, s - 1)),
                                              {0.04, 0.02, 0.01}, 100000, 4);
    EXPECT_TRUE(e.degenerate);
    EXPECT_NEAR(e.extrapolated, 2.0 * s, 0.1 * 2.0 * s) << "s=" << s;
    EXPECT_LE(e.extrapolated, 2.0 * s * 1.1);
  }
}

TEST(Minkowski, RejectsBadInput) {
  const AcceptanceRegion A(density::linear(1));
  EXPECT_THROW(minkowski_content_estimate(A, {0.01, 0.02}, 100000, 0), InvalidArgument);
  EXPECT_THROW(minkowski_content_estimate(A, {0.6}, 100000, 0), InvalidArgument);
  EXPECT_THROW(minkowski_content_estimate(A, {0.1}, 100, 0), InvalidArgument);
}
