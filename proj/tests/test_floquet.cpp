#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <random>

#include "alloy1d/floquet.hpp"
#include "alloy1d/reference_models.hpp"

using namespace alloy1d;

namespace {

constexpr double pi = 3.14159265358979323846;

// Kronig-Penney discriminant written out by hand: free half-cell then barrier
// of height 10 and width 1/2 (trace is invariant under the cyclic shift).
double kp_discriminant(double lambda) {
  const std::complex<double> k = std::sqrt(std::complex<double>(lambda));
  const std::complex<double> q = std::sqrt(std::complex<double>(10.0 - lambda));
  const auto D = 2.0 * std::cos(k / 2.0) * std::cosh(q / 2.0) +
                 (q / k - k / q) * std::sin(k / 2.0) * std::sinh(q / 2.0);
  return D.real();
}

std::vector<double> oracle_edges(double lo, double hi, double step) {
  std::vector<double> edges;
  for (double x = lo; x < hi; x += step) {
    for (double target : {2.0, -2.0}) {
      double a = x, b = x + step;
      double fa = kp_discriminant(a) - target, fb = kp_discriminant(b) - target;
      if (fa * fb > 0.0) continue;
      for (int i = 0; i < 80; ++i) {
        const double m = 0.5 * (a + b), fm = kp_discriminant(m) - target;
        if (fa * fm <= 0.0) {
          b = m;
        } else {
          a = m;
          fa = fm;
        }
      }
      edges.push_back(0.5 * (a + b));
    }
  }
  return edges;
}

}  // namespace

TEST(Discriminant, FreeExamples) {
  const ModelConfig m = reference::free_line();
  EXPECT_NEAR(discriminant(m, 0.0), 2.0, 1e-14);
  EXPECT_NEAR(discriminant(m, pi * pi), -2.0, 1e-12);
  EXPECT_NEAR(discriminant(m, -1.0), 2.0 * std::cosh(1.0), 1e-12);
}

TEST(Discriminant, ConjugateSymmetry) {
  const ModelConfig m = reference::kronig_penney();
  for (double re : {-3.0, 5.0, 20.0})
    for (double im : {0.1, 1.0}) {
      const cplx z(re, im);
      EXPECT_NEAR(std::abs(discriminant(m, std::conj(z)) - std::conj(discriminant(m, z))), 0.0, 1e-12);
    }
}

TEST(Discriminant, MatchesHandWrittenKronigPenney) {
  const ModelConfig m = reference::kronig_penney();
  for (double l = -5.0; l < 80.0; l += 0.37) EXPECT_NEAR(discriminant(m, l), kp_discriminant(l), 1e-10);
}

TEST(BandStructure, FreeLineIsOneBand) {
  const BandStructure bs = band_structure(reference::free_line(), 0.5, 50.0, 0.01);
  ASSERT_EQ(bs.bands.size(), 1u);
  EXPECT_EQ(bs.bands[0].left, 0.5);
  EXPECT_EQ(bs.bands[0].right, 50.0);
  EXPECT_EQ(bs.closed_gaps.size(), 2u);
}

TEST(BandStructure, BelowSpectrumIsOneGap) {
  const BandStructure bs = band_structure(reference::free_line(), -5.0, -1.0, 0.01);
  EXPECT_TRUE(bs.bands.empty());
  ASSERT_EQ(bs.gaps.size(), 1u);
  EXPECT_EQ(bs.region(-3.0), Region::gap);
}

TEST(BandStructure, KronigPenneyEdgesMatchOracle) {
  const BandStructure bs = band_structure(reference::kronig_penney(), -5.0, 80.0, 0.01);
  const std::vector<double> expected = oracle_edges(-5.0, 80.0, 1e-3);
  ASSERT_EQ(expected.size(), bs.edges.size());
  for (std::size_t i = 0; i < expected.size(); ++i) EXPECT_NEAR(bs.edges[i], expected[i], 1e-6);
  EXPECT_NEAR(bs.bands.front().left, 4.48547, 1e-5);
}

TEST(BandStructure, TooCoarseScanIsReported) {
  EXPECT_THROW(band_structure(reference::kronig_penney(), 0.0, 12.0, 12.0), ScanTooCoarse);
}

TEST(BandStructure, RejectsBadRange) {
  EXPECT_THROW(band_structure(reference::free_line(), 1.0, 0.0, 0.1), InvalidInput);
  EXPECT_THROW(band_structure(reference::free_line(), 0.0, 1.0, 0.0), InvalidInput);
}

TEST(Floquet, QuarterRotation) {
  const ModelConfig m = reference::free_line();
  const BandStructure bs = band_structure(m, 0.5, 50.0, 0.01);
  const FloquetData fd = floquet_data(m, pi * pi / 4, bs);
  EXPECT_EQ(fd.region, Region::band);
  EXPECT_NEAR(std::abs(fd.rho_plus * fd.rho_minus - 1.0), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(fd.rho_plus.real()), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(fd.rho_plus.imag()), 1.0, 1e-12);
  ASSERT_TRUE(fd.rotation.has_value());
  EXPECT_NEAR(*fd.rotation, pi / 2, 1e-12);
}

TEST(Floquet, GapMultipliers) {
  const ModelConfig m = reference::free_line();
  const BandStructure bs = band_structure(m, -5.0, -0.5, 0.01);
  const FloquetData fd = floquet_data(m, -1.0, bs);
  EXPECT_EQ(fd.region, Region::gap);
  EXPECT_NEAR(fd.rho_plus.real(), std::exp(-1.0), 1e-12);
  EXPECT_NEAR(fd.rho_minus.real(), std::exp(1.0), 1e-12);
}

TEST(Floquet, RandomEnergiesSatisfyStructure) {
  const ModelConfig m = reference::kronig_penney();
  const BandStructure bs = band_structure(m, -5.0, 80.0, 0.01);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> lam(-5.0, 80.0);
  int checked = 0;
  while (checked < 100) {
    const double l = lam(rng);
    if (bs.edge_distance(l) <= 1e-4) continue;
    const FloquetData fd = floquet_data(m, l, bs);
    ++checked;
    EXPECT_NEAR(std::abs(fd.rho_plus * fd.rho_minus - 1.0), 0.0, 1e-10);
    if (fd.region == Region::band) {
      EXPECT_NEAR(std::abs(fd.rho_plus), 1.0, 1e-12);
      EXPECT_NEAR(std::abs(fd.rho_minus - std::conj(fd.rho_plus)), 0.0, 1e-12);
    } else {
      EXPECT_LT(std::abs(fd.rho_plus), 1.0);
      EXPECT_GT(std::abs(fd.rho_minus), 1.0);
    }
    // (1, c) is an eigenvector of g0 for each multiplier.
    for (auto [rho, c] : {std::pair{fd.rho_plus, fd.c_plus}, std::pair{fd.rho_minus, fd.c_minus}}) {
      const cplx x = fd.g0.a + fd.g0.b * c, y = fd.g0.c + fd.g0.d * c;
      const double scale = std::max(1.0, std::abs(rho) * std::max(1.0, std::abs(c)));
      EXPECT_NEAR(std::abs(x - rho), 0.0, 1e-8 * scale);
      EXPECT_NEAR(std::abs(y - rho * c), 0.0, 1e-8 * scale);
    }
  }
}

TEST(Floquet, PlusBranchDecaysOffAxis) {
  // rho_+ continues to the root of modulus < 1 just above the real axis.
  const ModelConfig m = reference::kronig_penney();
  const BandStructure bs = band_structure(m, -5.0, 80.0, 0.01);
  for (const Interval& b : bs.bands) {
    const double l = b.mid();
    const FloquetData fd = floquet_data(m, l, bs);
    const cplx D = discriminant(m, cplx(l, 1e-6));
    const cplx r1 = (D + std::sqrt(D * D - 4.0)) / 2.0, r2 = (D - std::sqrt(D * D - 4.0)) / 2.0;
    const cplx inside = std::abs(r1) < 1.0 ? r1 : r2;
    EXPECT_NEAR(std::abs(inside - fd.rho_plus), 0.0, 1e-5);
  }
}

TEST(Floquet, RotationContinuousInsideBands) {
  const ModelConfig m = reference::kronig_penney();
  const BandStructure bs = band_structure(m, -5.0, 80.0, 0.01);
  for (const Interval& b : bs.bands) {
    double prev = NAN;
    for (double l = b.left + 1e-3; l < b.right - 1e-3; l += 1e-3) {
      const FloquetData fd = floquet_data(m, l, bs);
      ASSERT_TRUE(fd.rotation.has_value());
      if (!std::isnan(prev)) {
        EXPECT_LT(std::abs(*fd.rotation - prev), 0.05);
      }
      prev = *fd.rotation;
    }
  }
}

TEST(Floquet, TooCloseToEdge) {
  const ModelConfig m = reference::kronig_penney();
  const BandStructure bs = band_structure(m, -5.0, 80.0, 0.01);
  EXPECT_THROW(floquet_data(m, bs.edges.front() + 1e-8, bs), TooCloseToEdge);
}

TEST(Floquet, DirichletResonanceInGap) {
  ModelConfig m;
  m.v_per = {-0.5, {0.5, 0.5}, {0.0, 30.0}};
  const BandStructure bs = band_structure(m, -5.0, 80.0, 0.01);
  auto uD = [&](double l) { return cell_transfer(m.v_per, l).b; };
  bool found = false;
  for (double x = -5.0; x < 80.0 && !found; x += 0.01) {
    double a = x, b = x + 0.01;
    if (uD(a) * uD(b) > 0.0) continue;
    for (int i = 0; i < 200 && b - a > 0.0; ++i) {
      const double mid = 0.5 * (a + b);
      if (mid == a || mid == b) break;
      (uD(a) * uD(mid) <= 0.0 ? b : a) = mid;
    }
    const double root = std::abs(uD(a)) < std::abs(uD(b)) ? a : b;
    if (bs.region(root) == Region::gap && bs.edge_distance(root) > 1e-3) {
      EXPECT_THROW(floquet_data(m, root, bs), DirichletResonance);
      found = true;
    }
  }
  EXPECT_TRUE(found);
}
