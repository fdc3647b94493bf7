#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "alloy1d/reference_models.hpp"
#include "alloy1d/scattering.hpp"

using namespace alloy1d;

namespace {

constexpr double pi = 3.14159265358979323846;

ModelConfig zero_site() {
  ModelConfig m = reference::square_well();
  m.f = PiecewisePotential::constant(0.0);
  return m;
}

std::vector<double> band_samples(const BandStructure& bs, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> out;
  while (static_cast<int>(out.size()) < count) {
    std::uniform_int_distribution<std::size_t> pick(0, bs.bands.size() - 1);
    const Interval b = bs.bands[pick(rng)];
    std::uniform_real_distribution<double> u(b.left, b.right);
    const double l = u(rng);
    if (bs.edge_distance(l) > 1e-4) out.push_back(l);
  }
  return out;
}

}  // namespace

TEST(BandCoefficients, ZeroSiteIsTransparent) {
  const ModelConfig m = zero_site();
  const BandStructure bs = band_structure(m, 0.5, 60.0, 0.01);
  for (double l : {1.0, 5.0, 13.0, 30.0}) {
    const ScatteringCoefficients sc = band_coefficients(m, l, bs);
    EXPECT_NEAR(std::abs(sc.a - 1.0), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(sc.b), 0.0, 1e-12);
  }
}

TEST(BandCoefficients, SquareWellResonance) {
  const ModelConfig m = reference::square_well();
  const BandStructure bs = band_structure(m, 0.5, 60.0, 0.01);
  const ScatteringCoefficients sc = band_coefficients(m, 1.0 + pi * pi, bs);
  EXPECT_LE(std::abs(sc.b), 1e-8);
  EXPECT_NEAR(std::abs(sc.a), 1.0, 1e-8);
}

TEST(BandCoefficients, SquareBarrierClosedForm) {
  // Barrier of height 1 and width 1 in free space: |r/t| = V |sin k'| / (2 k k').
  const ModelConfig m = reference::square_well();
  const BandStructure bs = band_structure(m, 0.5, 60.0, 0.01);
  for (double l : {2.0, 5.0, 17.0, 33.3}) {
    const double k = std::sqrt(l), kp = std::sqrt(l - 1.0);
    const double rt = std::abs(std::sin(kp)) / (2.0 * k * kp);
    const ScatteringCoefficients sc = band_coefficients(m, l, bs);
    EXPECT_NEAR(std::abs(sc.b), rt, 1e-10);
    EXPECT_NEAR(std::abs(sc.a), std::sqrt(1.0 + rt * rt), 1e-10);
  }
  EXPECT_NEAR(std::abs(band_coefficients(m, 5.0, bs).b), 0.101663, 1e-6);
}

TEST(BandCoefficients, IdentityAndBranchSwap) {
  const ModelConfig m = reference::kronig_penney();
  const BandStructure bs = band_structure(m, -5.0, 80.0, 0.01);
  for (double l : band_samples(bs, 200, 1)) {
    const ScatteringCoefficients sc = band_coefficients(m, l, bs);
    EXPECT_NEAR(std::norm(sc.a) - std::norm(sc.b), 1.0, 1e-8);
    const ScatteringCoefficients sw = band_coefficients(m, l, bs, true);
    EXPECT_EQ(sw.branch_id, -sc.branch_id);
    EXPECT_NEAR(std::abs(sw.a - std::conj(sc.a)), 0.0, 1e-10 * std::abs(sc.a));
    EXPECT_NEAR(std::abs(sw.b - std::conj(sc.b)), 0.0, 1e-10 * std::abs(sc.a));
  }
}

TEST(BandCoefficients, RejectsGapEnergy) {
  const ModelConfig m = reference::kronig_penney();
  const BandStructure bs = band_structure(m, -5.0, 80.0, 0.01);
  EXPECT_THROW(band_coefficients(m, 0.0, bs), InvalidInput);
}

TEST(GapCoefficients, ZeroSite) {
  const ModelConfig m = zero_site();
  const BandStructure bs = band_structure(m, -5.0, -0.5, 0.01);
  const GapCoefficients gc = gap_coefficients(m, -1.0, bs);
  EXPECT_NEAR(gc.a1, 1.0, 1e-12);
  EXPECT_NEAR(gc.a2, 1.0, 1e-12);
  EXPECT_NEAR(gc.b1, 0.0, 1e-12);
  EXPECT_NEAR(gc.b2, 0.0, 1e-12);
}

TEST(GapCoefficients, FreeBackgroundClosedForm) {
  // g0 has eigenvectors (1, -1) for e^-1 and (1, 1) for e; g1 is a barrier of
  // height 1 at lambda = -1, i.e. hyperbolic with k = sqrt 2.
  const ModelConfig m = reference::square_well();
  const BandStructure bs = band_structure(m, -5.0, -0.5, 0.01);
  const GapCoefficients gc = gap_coefficients(m, -1.0, bs);
  const double r2 = std::sqrt(2.0), e = std::exp(1.0);
  const double ch = std::cosh(r2), sh = std::sinh(r2);
  const double ux = ch - sh / r2, uy = r2 * sh - ch;  // g1 (1, -1)
  const double wx = ch + sh / r2, wy = r2 * sh + ch;  // g1 (1, 1)
  EXPECT_NEAR(gc.a1, e * (ux - uy) / 2, 1e-12);
  EXPECT_NEAR(gc.b1, (ux + uy) / (2 * e), 1e-12);
  EXPECT_NEAR(gc.a2, (wx + wy) / (2 * e), 1e-12);
  EXPECT_NEAR(gc.b2, e * (wx - wy) / 2, 1e-12);
  EXPECT_EQ(gc.v1_unit_component, 0);
  EXPECT_EQ(gc.v2_unit_component, 0);
}

TEST(GapCoefficients, RejectsBandAndEdge) {
  const ModelConfig m = reference::kronig_penney();
  const BandStructure bs = band_structure(m, -5.0, 80.0, 0.01);
  EXPECT_THROW(gap_coefficients(m, bs.bands.front().mid(), bs), TooCloseToEdge);
  EXPECT_THROW(gap_coefficients(m, bs.edges.front() - 1e-9, bs), TooCloseToEdge);
}

TEST(Conjugation, ReconstructsCellMatrices) {
  const ModelConfig m = reference::kronig_penney();
  const BandStructure bs = band_structure(m, -5.0, 80.0, 0.01);
  for (double l : band_samples(bs, 100, 2)) {
    const ConjugationDecomposition cd = conjugation_decomposition(m, l, bs);
    const TransferMatrix g0 = cell_transfer(m.v_per, l), g1 = perturbed_cell(m, l);
    const double scale = std::max(1.0, max_abs_entry(g1));
    EXPECT_LE(max_abs_entry(cd.g0() - g0), 1e-8 * scale);
    EXPECT_LE(max_abs_entry(cd.g1() - g1), 1e-8 * scale);
    EXPECT_NEAR(cd.s.det(), 1.0, 1e-8);
    EXPECT_NEAR(cd.g0_tilde.det(), 1.0, 1e-12);
    EXPECT_NEAR(cd.g0_tilde.a, cd.g0_tilde.d, 1e-15);
    EXPECT_NEAR(cd.g0_tilde.b, -cd.g0_tilde.c, 1e-15);
  }
}

TEST(Conjugation, ZeroSiteGivesIdentity) {
  const ModelConfig m = zero_site();
  const BandStructure bs = band_structure(m, 0.5, 60.0, 0.01);
  const ConjugationDecomposition cd = conjugation_decomposition(m, 5.0, bs);
  EXPECT_LE(max_abs_entry(cd.s - TransferMatrix::identity()), 1e-12);
}

TEST(Conjugation, ResonanceGivesRotation) {
  const ModelConfig m = reference::square_well();
  const BandStructure bs = band_structure(m, 0.5, 60.0, 0.01);
  const ConjugationDecomposition cd = conjugation_decomposition(m, 1.0 + pi * pi, bs);
  // b = 0 makes s = [[Re a, Im a], [-Im a, Re a]], an orthogonal matrix.
  const TransferMatrix sts = TransferMatrix{cd.s.a, cd.s.c, cd.s.b, cd.s.d} * cd.s;
  EXPECT_LE(max_abs_entry(sts - TransferMatrix::identity()), 1e-8);
}

TEST(CriticalSet, SquareWell) {
  const CriticalSet cs = critical_set(reference::square_well(), 0.5, 60.0, 0.01);
  const std::vector<double> roots = cs.energies(CriticalKind::b_root);
  ASSERT_EQ(roots.size(), 2u);
  EXPECT_NEAR(roots[0], 1.0 + pi * pi, 1e-6);
  EXPECT_NEAR(roots[1], 1.0 + 4 * pi * pi, 1e-6);
  const std::vector<double> dz = cs.energies(CriticalKind::d_zero);
  ASSERT_EQ(dz.size(), 2u);
  EXPECT_NEAR(dz[0], pi * pi / 4, 1e-8);
  EXPECT_NEAR(dz[1], 9 * pi * pi / 4, 1e-8);
  const std::vector<double> edges = cs.energies(CriticalKind::band_edge);
  ASSERT_EQ(edges.size(), 2u);
  EXPECT_NEAR(edges[0], pi * pi, 1e-6);
  EXPECT_NEAR(edges[1], 4 * pi * pi, 1e-6);
  for (std::size_t i = 1; i < cs.entries.size(); ++i) EXPECT_LE(cs.entries[i - 1].lambda, cs.entries[i].lambda);
  EXPECT_NEAR(cs.distance(11.0), 11.0 - (1.0 + pi * pi), 1e-6);
}

TEST(CriticalSet, ZeroSiteIsDegenerate) {
  EXPECT_THROW(critical_set(zero_site(), 0.5, 60.0, 0.01), DegenerateSite);
}

TEST(CriticalSet, KronigPenneyEntriesAreGenuine) {
  const ModelConfig m = reference::kronig_penney();
  const CriticalSet cs = critical_set(m, -5.0, 80.0, 0.01);
  const BandStructure bs = band_structure(m, -5.0, 80.0, 0.01);
  for (const CriticalEntry& e : cs.entries) {
    switch (e.kind) {
      case CriticalKind::b_root:
        EXPECT_LE(std::abs(band_coefficients(m, e.lambda, bs).b), 1e-7);
        break;
      case CriticalKind::d_zero:
        EXPECT_LE(std::abs(discriminant(m, e.lambda)), 1e-7);
        break;
      case CriticalKind::band_edge:
        EXPECT_NEAR(std::abs(discriminant(m, e.lambda)), 2.0, 1e-5);
        break;
      case CriticalKind::gap_coeff_root: {
        const GapCoefficients gc = gap_coefficients(m, e.lambda, bs);
        const double smallest = std::min({std::abs(gc.a1), std::abs(gc.a2), std::abs(gc.b1 * gc.b2)});
        EXPECT_LE(smallest, 1e-6);
        break;
      }
    }
  }
  EXPECT_EQ(cs.energies(CriticalKind::d_zero).size(), bs.bands.size());
}

TEST(ThreeDirections, Examples) {
  const ModelConfig sw = reference::square_well();
  EXPECT_TRUE(three_direction_test(sw, 5.0, 4));
  EXPECT_TRUE(three_direction_test(sw, -1.0, 4));
  EXPECT_FALSE(three_direction_test(zero_site(), pi * pi / 4, 4));
}

TEST(ThreeDirections, ProjectiveDistance) {
  EXPECT_NEAR(projective_distance({1.0, 0.0}, {0.0, 2.0}), 1.0, 1e-15);
  EXPECT_NEAR(projective_distance({1.0, 1.0}, {-2.0, -2.0}), 0.0, 1e-15);
}
