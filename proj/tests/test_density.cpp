#include <gtest/gtest.h>

#include <cmath>

#include "arqmc/density.hpp"
#include "arqmc/rng.hpp"
#include "oracles.hpp"

using namespace arqmc;

TEST(PsiEll, Base2Ell2IsIdentityOnDyadics) {
  const Density psi = density::psi_ell(2, 2);
  for (int n = 0; n < 1024; ++n) {
    const double x = n / 1024.0;
    EXPECT_DOUBLE_EQ(psi(x), x);
  }
}

TEST(PsiEll, HandExpansionValues) {
  const Density psi3 = density::psi_ell(2, 3);
  EXPECT_DOUBLE_EQ(psi3(0.5), 0.25);
  EXPECT_DOUBLE_EQ(psi3(0.75), 0.25 + 0.0625);
  for (int b : {2, 3, 5})
    for (int ell : {2, 3, 4}) EXPECT_EQ(density::psi_ell(b, ell)(0.0), 0.0);
}

TEST(PsiEll, MatchesDigitLoopOracle) {
  CounterRng rng(11);
  for (int b : {2, 3}) {
    for (int ell : {2, 3, 4}) {
      const int p = 12;
      const Density psi = density::psi_ell(b, ell, p);
      const auto cells = ipow(b, p);
      for (int i = 0; i < 200; ++i) {
        const auto n = static_cast<std::uint64_t>(rng.uniform() * static_cast<double>(cells));
        const double x = static_cast<double>(n) / static_cast<double>(cells);
        EXPECT_NEAR(psi(x), oracle::psi_digits(n, p, b, ell), 1e-14) << "b=" << b << " ell=" << ell;
      }
    }
  }
}

TEST(PsiEll, Psi2IsIdentityWithinTruncation) {
  for (int b : {2, 3, 5}) {
    const Density psi = density::psi_ell(b, 2);
    const double tol = std::pow(static_cast<double>(b), -density::default_digit_precision(b)) + 1e-15;
    for (int i = 0; i < 10000; ++i) {
      const double x = (i + 0.37) / 10000.0;
      ASSERT_NEAR(psi(x), x, tol) << "b=" << b;
    }
  }
}

TEST(PsiEll, MassMatchesRiemannOracle) {
  for (auto [b, ell] : {std::pair{2, 2}, {2, 3}, {3, 2}, {3, 3}}) {
    const Density psi = density::psi_ell(b, ell, 10);
    auto f = [&](double x) { return psi(x); };
    for (double t : {0.1, 0.25, 0.5, 0.77, 1.0}) {
      // 2^20 midpoint cells: each depth-10 step cell is resolved, error <= jumps * h
      EXPECT_NEAR(psi.box_mass(t), oracle::riemann_mass_1d(f, t, 1 << 20), 2e-5)
          << "b=" << b << " ell=" << ell << " t=" << t;
    }
    EXPECT_NEAR(psi.box_mass(1.0), psi.normalizer(), 1e-12);
  }
}

TEST(PsiEll, NormalizerClosedForm) {
  // C = (b-1)/2 * sum_i r^i -> (b-1)/2 * r/(1-r)
  const Density psi = density::psi_ell(2, 3);
  EXPECT_NEAR(psi.normalizer(), 0.5 * (0.25 / 0.75), 1e-12);
  EXPECT_NEAR(density::psi_ell(2, 2).normalizer(), 0.5, 1e-12);
}

TEST(PsiEll, RejectsBadParameters) {
  EXPECT_THROW(density::psi_ell(2, 1), InvalidArgument);
  EXPECT_THROW(density::psi_ell(1, 2), InvalidArgument);
  EXPECT_THROW(density::psi_ell(2, 3, 2), InvalidArgument);
}

TEST(PsiEll, RangeIsExactOnCells) {
  const Density psi = density::psi_ell(2, 3, 8);
  CounterRng rng(5);
  for (int i = 0; i < 300; ++i) {
    double lo = rng.uniform(), hi = rng.uniform();
    if (lo > hi) std::swap(lo, hi);
    if (hi - lo < 1e-3) continue;
    const ValueRange r = psi.range(std::span<const double>(&lo, 1), std::span<const double>(&hi, 1));
    double mn = 1e9, mx = -1e9;
    for (int j = 0; j < 2000; ++j) {
      const double x = lo + (hi - lo) * j / 2000.0;
      mn = std::min(mn, psi(x));
      mx = std::max(mx, psi(x));
    }
    EXPECT_LE(r.lo, mn + 1e-15);
    EXPECT_GE(r.hi, mx - 1e-15);
    EXPECT_DOUBLE_EQ(r.lo, psi(lo));
  }
}

TEST(Density, BuiltinsAreBoundedAndMonotone) {
  const std::vector<Density> all{density::constant(2.5, 1), density::constant(1.0, 2), density::linear(1),
                                 density::linear(2), density::psi_ell(2, 3), density::psi_ell(3, 2)};
  CounterRng rng(3);
  for (const auto& psi : all) {
    const int d = psi.dim();
    std::vector<double> a(d), b(d);
    for (int i = 0; i < 1000; ++i) {
      for (int j = 0; j < d; ++j) {
        a[j] = rng.uniform();
        b[j] = a[j] + (1.0 - a[j]) * rng.uniform();
      }
      const double v = psi(a);
      ASSERT_GE(v, 0.0) << psi.name();
      ASSERT_LE(v, psi.bound()) << psi.name();
      ASSERT_LE(psi.box_mass(a), psi.box_mass(b) + 1e-15) << psi.name();
    }
    std::vector<double> ones(d, 1.0);
    EXPECT_NEAR(psi.box_mass(ones), psi.normalizer(), 1e-12) << psi.name();
    EXPECT_LE(psi.normalizer(), psi.bound());
  }
}

TEST(Density, LinearMassClosedForm) {
  const Density lin2 = density::linear(2);
  const std::vector<double> t{0.3, 0.8};
  // int_0^.3 int_0^.8 (x+y)/2 = (0.3^2*0.8 + 0.3*0.8^2)/4
  EXPECT_NEAR(lin2.box_mass(t), (0.09 * 0.8 + 0.3 * 0.64) / 4.0, 1e-15);
  EXPECT_DOUBLE_EQ(density::linear(1).box_mass(0.6), 0.18);
}

TEST(Density, ZeroDensityRejected) {
  EXPECT_THROW(density::constant(0.0), InvalidArgument);
  auto zero = [](std::span<const double>) { return 0.0; };
  EXPECT_THROW(density::from_function("zero", 1, 1.0, zero, 64), InvalidArgument);
}

TEST(Density, QuadratureDensityTracksExactMass) {
  auto sq = [](std::span<const double> z) { return z[0] * z[0]; };
  const Density psi = density::from_function("square", 1, 1.0, sq, 4096);
  EXPECT_EQ(psi.mass_kind(), MassKind::quadrature);
  for (double t : {0.2, 0.5, 0.9}) EXPECT_NEAR(psi.box_mass(t), t * t * t / 3.0, psi.mass_tolerance());
  EXPECT_NEAR(psi.normalizer(), 1.0 / 3.0, 1e-6);
  EXPECT_FALSE(psi.has_exact_range());
}

TEST(Density, ParseSpecs) {
  EXPECT_EQ(density::parse("linear").name(), "linear");
  EXPECT_DOUBLE_EQ(density::parse("const:2", 2).bound(), 2.0);
  EXPECT_EQ(density::parse("psi_ell:3:2").name(), "psi_ell:3:2");
  EXPECT_THROW(density::parse("bogus"), InvalidArgument);
  EXPECT_THROW(density::parse("const:x"), InvalidArgument);
  EXPECT_THROW(density::parse("psi_ell:2:3", 2), InvalidArgument);
}

TEST(Region, MembershipExamples) {
  const AcceptanceRegion cst(density::constant(3.0, 1));
  CounterRng rng(1);
  for (int i = 0; i < 100; ++i) {
    const double z[2] = {rng.uniform(), rng.uniform()};
    EXPECT_TRUE(cst.contains(z));
  }
  const AcceptanceRegion lin(density::linear(1));
  const double in[2] = {0.3, 0.2}, out[2] = {0.3, 0.4};
  EXPECT_TRUE(lin.contains(in));
  EXPECT_FALSE(lin.contains(out));
  const AcceptanceRegion p3(density::psi_ell(2, 3));
  const double tie[2] = {0.5, 0.25};
  EXPECT_TRUE(p3.contains(tie));
  const double wrong[3] = {0.1, 0.1, 0.1};
  EXPECT_THROW(lin.contains(wrong), InvalidArgument);
}

TEST(Region, VolumeExamples) {
  EXPECT_DOUBLE_EQ(AcceptanceRegion(density::constant(1.0, 1)).volume(), 1.0);
  EXPECT_DOUBLE_EQ(AcceptanceRegion(density::linear(1)).volume(), 0.5);
  // psi_3 in base 2 through a Riemann oracle on a 2^-20 grid
  const Density p3 = density::psi_ell(2, 3);
  auto f = [&](double x) { return p3(x); };
  EXPECT_NEAR(AcceptanceRegion(p3).volume(), oracle::riemann_mass_1d(f, 1.0, 1 << 20), 1e-6);
}

TEST(Region, MonteCarloVolumeWithinFourSigma) {
  const std::vector<Density> all{density::constant(1.0, 1), density::linear(1), density::linear(2),
                                 density::psi_ell(2, 2), density::psi_ell(2, 3), density::psi_ell(3, 3)};
  const int n = 1000000;
  for (const auto& psi : all) {
    const AcceptanceRegion A(psi);
    const int s = A.dim();
    std::vector<double> z(s);
    std::size_t hits = 0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < s; ++j) z[j] = counter_uniform(99, i, j);
      hits += A.contains(z);
    }
    const double p = A.volume();
    const double se = std::sqrt(std::max(p * (1 - p), 1e-12) / n);
    EXPECT_NEAR(static_cast<double>(hits) / n, p, 4 * se + 1e-12) << psi.name();
  }
}

TEST(Region, ScalingLeavesRegionUnchanged) {
  const Density lin = density::linear(1);
  const Density big = density::scaled(lin, 3.0);
  EXPECT_DOUBLE_EQ(AcceptanceRegion(big).volume(), AcceptanceRegion(lin).volume());
  const double z[2] = {0.4, 0.39};
  EXPECT_EQ(AcceptanceRegion(big).contains(z), AcceptanceRegion(lin).contains(z));
}
