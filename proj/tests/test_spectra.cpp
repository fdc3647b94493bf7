#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "alloy1d/floquet.hpp"
#include "alloy1d/lyapunov.hpp"
#include "alloy1d/reference_models.hpp"
#include "alloy1d/spectra.hpp"

using namespace alloy1d;

namespace {

constexpr double pi = 3.14159265358979323846;
constexpr std::uint64_t kSeed = 777;

PiecewisePotential free_box(std::int64_t L) {
  return box_potential(reference::free_line(), Configuration::constant(0.0, -L, L), L);
}

PiecewisePotential random_box(std::uint64_t sample) {
  const ModelConfig m = reference::kronig_penney();
  return box_potential(m, box_configuration(m, 20, kSeed, sample), 20);
}

// u(L/2) for Dirichlet data at the left end, by multiplying piece propagators.
double shooting(const PiecewisePotential& box, double lambda) {
  TransferMatrix u = TransferMatrix::identity();
  for (std::size_t i = 0; i < box.size(); ++i) u = piece_propagator(box.widths[i], box.values[i], lambda) * u;
  return u.b;
}

// Second-difference Dirichlet discretization; Sturm count of eigenvalues < x.
struct FiniteDifference {
  std::vector<double> diag;
  double off = 0.0;

  FiniteDifference(const PiecewisePotential& box, double h) {
    const auto n = static_cast<std::size_t>(std::llround(box.length() / h)) - 1;
    off = -1.0 / (h * h);
    diag.resize(n);
    for (std::size_t i = 0; i < n; ++i) diag[i] = 2.0 / (h * h) + box.value_at(box.x_start + (i + 1) * h);
  }

  std::size_t count_below(double x) const {
    std::size_t neg = 0;
    double d = 1.0;
    for (std::size_t i = 0; i < diag.size(); ++i) {
      d = diag[i] - x - (i == 0 ? 0.0 : off * off / d);
      if (d == 0.0) d = -1e-300;
      neg += d < 0.0;
    }
    return neg;
  }

  double eigenvalue(std::size_t k, double lo, double hi) const {  // k-th (0-based)
    for (int it = 0; it < 100; ++it) {
      const double m = 0.5 * (lo + hi);
      (count_below(m) > k ? hi : lo) = m;
    }
    return 0.5 * (lo + hi);
  }
};

LyapunovEstimate exact_gamma(double lambda) {
  LyapunovEstimate e;
  e.lambda = lambda;
  e.mean = lambda < 0.0 ? std::sqrt(-lambda) : 0.0;
  return e;
}

IDSTable exact_free_ids(double top, double step) {
  IDSTable t;
  for (double l = 0.0; l <= top + 1e-9; l += step) {
    t.lambda_grid.push_back(l);
    t.values.push_back(std::sqrt(l) / pi);
    t.std_errors.push_back(0.0);
  }
  return t;
}

}  // namespace

TEST(Count, FreeClosedForm) {
  for (std::int64_t L : {10, 21, 40})
    for (double l : {0.3, 2.0, 17.5, 50.0})
      EXPECT_EQ(eigenvalue_count(free_box(L), l), static_cast<std::int64_t>(std::floor(L * std::sqrt(l) / pi)));
}

TEST(Count, BelowSpectrumIsZero) {
  EXPECT_EQ(eigenvalue_count(random_box(0), -1.0), 0);
  EXPECT_EQ(eigenvalue_count(free_box(30), -0.01), 0);
}

TEST(Count, MatchesShootingSignChanges) {
  for (std::uint64_t s = 0; s < 3; ++s) {
    const PiecewisePotential box = random_box(s);
    double prev = shooting(box, -1.0);
    std::int64_t zeros = 0;
    for (double l = -1.0 + 1e-3; l < 60.0; l += 1e-3) {
      const double cur = shooting(box, l);
      if (prev * cur < 0.0) ++zeros;
      prev = cur;
      if (std::fmod(l + 1.0, 0.25) < 1e-3) {
        ASSERT_EQ(eigenvalue_count(box, l), zeros) << "lambda = " << l;
      }
    }
  }
}

TEST(Count, UnitJumpsOnFineGrid) {
  const PiecewisePotential box = random_box(4);
  std::int64_t prev = eigenvalue_count(box, -1.0);
  for (double l = -1.0; l < 80.0; l += 2e-3) {
    const std::int64_t c = eigenvalue_count(box, l);
    EXPECT_GE(c, prev);
    EXPECT_LE(c - prev, 1);
    prev = c;
  }
}

TEST(Eigenvalues, FreeBox) {
  const std::vector<double> ev = box_eigenvalues(free_box(10), 0.0, 2.0);
  ASSERT_EQ(ev.size(), 4u);
  for (int n = 1; n <= 4; ++n) EXPECT_NEAR(ev[n - 1], std::pow(n * pi / 10, 2), 1e-10);
}

TEST(Eigenvalues, CountConsistency) {
  const PiecewisePotential box = random_box(1);
  const std::vector<double> ev = box_eigenvalues(box, 3.0, 45.0);
  EXPECT_EQ(static_cast<std::int64_t>(ev.size()), eigenvalue_count(box, 45.0) - eigenvalue_count(box, 3.0));
  for (std::size_t i = 1; i < ev.size(); ++i) EXPECT_LT(ev[i - 1], ev[i]);
}

TEST(Eigenvalues, MatchFiniteDifferenceOracle) {
  for (std::uint64_t s = 0; s < 2; ++s) {
    const PiecewisePotential box = random_box(s);
    const FiniteDifference fd(box, 1e-3);
    const std::vector<double> ev = box_eigenvalues(box, -1.0, 40.0);
    ASSERT_FALSE(ev.empty());
    for (std::size_t k = 0; k < ev.size(); ++k) EXPECT_NEAR(ev[k], fd.eigenvalue(k, -1.0, 50.0), 5e-3);
  }
}

TEST(Eigenvalues, RejectsEmptyWindow) { EXPECT_THROW(box_eigenvalues(free_box(10), 2.0, 1.0), InvalidInput); }

TEST(Ids, FreeAtPiSquared) {
  const IDSTable t = ids_estimate(reference::free_line(), {pi * pi}, 100, 1, kSeed);
  EXPECT_NEAR(t.values[0], 1.0, 1.0 / 100);
}

TEST(Ids, FreeWithinOneOverL) {
  for (std::int64_t L : {30, 60, 120})
    for (double l : {2 * pi * pi, 7.0, 31.0}) {
      const IDSTable t = ids_estimate(reference::free_line(), {l}, L, 1, kSeed);
      EXPECT_LE(std::abs(t.values[0] - std::sqrt(l) / pi), 1.0 / static_cast<double>(L));
    }
}

TEST(Ids, MonotoneAndNonNegative) {
  std::vector<double> grid;
  for (double l = -2.0; l <= 60.0; l += 0.5) grid.push_back(l);
  const IDSTable t = ids_estimate(reference::kronig_penney(), grid, 60, 30, kSeed, 4);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    EXPECT_GE(t.values[i], 0.0);
    if (i > 0) {
      EXPECT_GE(t.values[i], t.values[i - 1]);
    }
  }
}

TEST(Ids, BracketedByExtremeModels) {
  const ModelConfig m = reference::square_well();
  const std::int64_t L = 61;
  for (double l : {3.0, 12.0, 30.0}) {
    const IDSTable t = ids_estimate(m, {l}, L, 100, kSeed, 4);
    const double low = static_cast<double>(eigenvalue_count(m, Configuration::constant(1.0, -L, L), L, l)) / L;
    const double high = static_cast<double>(eigenvalue_count(m, Configuration::constant(0.0, -L, L), L, l)) / L;
    EXPECT_GE(t.values[0], low - 2 * t.std_errors[0]);
    EXPECT_LE(t.values[0], high + 2 * t.std_errors[0]);
  }
}

TEST(Thouless, FreeClosedForms) {
  std::vector<LyapunovEstimate> gamma;
  for (double l = -4.0; l <= 9.0; l += 0.25)
    if (std::abs(l) >= 1.0) gamma.push_back(exact_gamma(l));
  const IDSTable ids = exact_free_ids(400.0, 0.05);
  const ThoulessResult r = thouless_check(gamma, ids, {{-4.0, -1.0}, {1.0, 9.0}});
  EXPECT_LE(r.max_residual, 0.05);
  EXPECT_FALSE(r.tail_warning);

  std::vector<LyapunovEstimate> doubled = gamma;
  for (LyapunovEstimate& e : doubled) e.mean *= 2.0;
  EXPECT_GT(thouless_check(doubled, ids, {{-4.0, -1.0}, {1.0, 9.0}}).max_residual, r.max_residual);
}

TEST(Thouless, TailCorrectionMatters) {
  std::vector<LyapunovEstimate> gamma;
  for (double l = -4.0; l <= 9.0; l += 0.25)
    if (std::abs(l) >= 1.0) gamma.push_back(exact_gamma(l));
  const IDSTable ids = exact_free_ids(400.0, 0.05);
  ThoulessOptions raw;
  raw.tail_correction = false;
  const ThoulessResult with = thouless_check(gamma, ids, {{-4.0, -1.0}, {1.0, 9.0}});
  const ThoulessResult without = thouless_check(gamma, ids, {{-4.0, -1.0}, {1.0, 9.0}}, raw);
  EXPECT_LT(with.max_residual, without.max_residual);
  EXPECT_TRUE(without.tail_warning);
}

TEST(Thouless, Errors) {
  const IDSTable ids = exact_free_ids(50.0, 0.1);
  const std::vector<LyapunovEstimate> gamma{exact_gamma(-2.0), exact_gamma(3.0)};
  EXPECT_THROW(thouless_check(gamma, ids, {}), InvalidInput);
  EXPECT_THROW(thouless_check(gamma, ids, {{100.0, 120.0}}), InsufficientRange);
  EXPECT_THROW(thouless_check(gamma, ids, {{10.0, 20.0}}), InvalidInput);
}

TEST(Green, FreeClosedForm) {
  const ModelConfig m = reference::free_line();
  const Configuration c = Configuration::constant(0.0, -20, 20);
  const double g = green_function(m, c, 40, -1.0, 1.0, 0.0);
  EXPECT_NEAR(g, std::sinh(19.0) * std::sinh(20.0) / std::sinh(40.0), 1e-6);
  EXPECT_NEAR(g, std::exp(-1.0) / 2, 1e-6);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> pos(-20.0, 20.0);
  for (int i = 0; i < 50; ++i) {
    const double x = pos(rng), y = pos(rng);
    const double hi = std::max(x, y), lo = std::min(x, y);
    const double expected = std::sinh(20.0 - hi) * std::sinh(20.0 + lo) / std::sinh(40.0);
    EXPECT_NEAR(green_function(m, c, 40, -1.0, x, y), expected, 1e-10);
  }
}

TEST(Green, Symmetric) {
  const ModelConfig m = reference::kronig_penney();
  const Configuration c = box_configuration(m, 21, kSeed, 0);
  const BoxSolutions sol(box_potential(m, c, 21), 6.3);
  for (double x : {-9.7, -2.2, 0.4, 7.9})
    for (double y : {-8.1, 0.0, 3.3}) EXPECT_NEAR(sol(x, y), sol(y, x), 1e-10 * std::max(1.0, std::abs(sol(x, y))));
}

TEST(Green, SolvesOdeOffDiagonal) {
  const ModelConfig m = reference::square_well();
  const Configuration c = box_configuration(m, 21, kSeed, 3);
  const PiecewisePotential box = box_potential(m, c, 21);
  const double lambda = 4.2, h = 1e-3, y = 0.1;
  const BoxSolutions sol(box, lambda);
  for (double x : {-8.2, -4.9, 2.2, 6.1, 9.3}) {
    const double g = sol(x, y);
    const double second = (sol(x + h, y) - 2.0 * g + sol(x - h, y)) / (h * h);
    const double q = box.value_at(x) - lambda;
    EXPECT_NEAR(second, q * g, 1e-5 * (1.0 + q * q) * std::abs(g) + 1e-7);
  }
}

TEST(Green, EigenvalueProximity) {
  const PiecewisePotential box = random_box(2);
  const std::vector<double> ev = box_eigenvalues(box, 5.0, 30.0);
  ASSERT_FALSE(ev.empty());
  EXPECT_THROW(BoxSolutions(box, ev.front() + 1e-12), EigenvalueProximity);
  EXPECT_NO_THROW(BoxSolutions(box, ev.front() + 1e-3));
}

TEST(Green, RejectsPointsOutsideBox) {
  const ModelConfig m = reference::free_line();
  EXPECT_THROW(green_function(m, Configuration::constant(0.0, -5, 5), 10, -1.0, 6.0, 0.0), InvalidInput);
}

TEST(GoodBox, DeepGapIsAlwaysGood) {
  const GoodBoxResult r = good_box_probability(reference::square_well(), -3.0, std::sqrt(3.0) / 2, 45, 50, kSeed, 4);
  EXPECT_EQ(r.fraction, 1.0);
  EXPECT_EQ(r.n_proximal, 0);
}

TEST(GoodBox, LengthMustBeOddMultipleOfThree) {
  EXPECT_THROW(good_box_probability(reference::square_well(), -3.0, 0.5, 44, 5, kSeed), InvalidInput);
  EXPECT_THROW(good_box_probability(reference::square_well(), -3.0, 0.5, 42, 5, kSeed), InvalidInput);
  EXPECT_NO_THROW(require_good_box_length(45));
}

TEST(GoodBox, WindowConsistency) {
  const ModelConfig m = reference::square_well();
  const double lambda = -0.5;
  const std::int64_t L = 45;
  const double gamma = estimate_lyapunov(m, lambda, 10000, 50, kSeed, {{0, 1}, 4, kDefaultBurnIn}).mean;
  const double eps = gamma / 4, eps_prime = gamma / 2;
  const double kappa = kappa_L(gamma, eps, eps_prime, 0.5, 0.5, L);
  ASSERT_GT(kappa, 0.0);
  const GoodBoxResult at = good_box_probability(m, lambda, gamma - eps, L, 200, kSeed, 4);
  const GoodBoxResult near = good_box_probability(m, lambda + 0.5 * kappa, gamma - eps_prime, L, 200, kSeed, 4);
  const double sigma = std::sqrt(at.fraction * (1 - at.fraction) / 200.0);
  EXPECT_GE(near.fraction, at.fraction - 2.0 * sigma);
}

TEST(GoodBox, KappaRequiresOrderedEpsilons) {
  EXPECT_THROW(kappa_L(1.0, 0.5, 0.2, 0.5, 0.5, 45), InvalidInput);
  EXPECT_GT(kappa_L(1.0, 0.2, 0.5, 0.5, 0.5, 45), 0.0);
}

TEST(Wegner, FractionsAndTrend) {
  const ModelConfig m = reference::square_well();
  std::vector<double> f;
  for (std::int64_t L : {33, 63, 93}) {
    const WegnerResult r = wegner_probability(m, 5.0, L, 0.5, 0.5, 500, kSeed, 4);
    EXPECT_GE(r.fraction, 0.0);
    EXPECT_LE(r.fraction, 1.0);
    f.push_back(r.fraction);
  }
  for (std::size_t i = 1; i < f.size(); ++i) {
    const double sd = std::sqrt((f[i] * (1 - f[i]) + f[i - 1] * (1 - f[i - 1])) / 500.0);
    EXPECT_LE(f[i], f[i - 1] + 2.0 * sd);
  }
}

TEST(Wegner, DeepBelowSpectrum) {
  EXPECT_EQ(wegner_probability(reference::square_well(), -3.0, 33, 0.5, 0.5, 50, kSeed).fraction, 0.0);
}

TEST(Wegner, RejectsBadExponent) {
  EXPECT_THROW(wegner_probability(reference::square_well(), 5.0, 33, 0.5, 1.0, 5, kSeed), InvalidInput);
  EXPECT_THROW(wegner_probability(reference::square_well(), 5.0, 33, 0.0, 0.5, 5, kSeed), InvalidInput);
}

TEST(Decay, GapStateMatchesFloquetRate) {
  ModelConfig m;
  m.v_per = reference::kronig_penney_cell();
  m.f = PiecewisePotential::constant(-30.0);
  m.mu = CouplingDistribution::bernoulli();
  Configuration c = Configuration::constant(0.0, -20, 20);
  c.couplings[20] = 1.0;  // cell 0
  const PiecewisePotential box = box_potential(m, c, 41);
  const BandStructure bs = band_structure(m, -40.0, 80.0, 0.01);
  const std::vector<double> ev = box_eigenvalues(box, -40.0, bs.bands.front().left - 0.5);
  ASSERT_FALSE(ev.empty());
  const double E = ev.front();
  const double rate = std::acosh(std::abs(discriminant(m, E)) / 2.0);
  const DecayFit fit = eigenfunction_decay(box, E);
  EXPECT_NEAR(fit.decay_rate, rate, 0.1 * rate);
  EXPECT_NEAR(fit.center, 0.0, 1.0);
}

TEST(Decay, FreeBoxIsFlat) {
  const PiecewisePotential box = free_box(20);
  const std::vector<double> ev = box_eigenvalues(box, 0.5, 1.5);
  ASSERT_FALSE(ev.empty());
  double best = ev.front();
  for (double e : ev)
    if (std::abs(e - 1.0) < std::abs(best - 1.0)) best = e;
  const DecayFit fit = eigenfunction_decay(box, best);
  EXPECT_GE(fit.decay_rate, -0.05);
  EXPECT_LE(fit.decay_rate, 0.05);
}

TEST(Decay, NonEigenvalueIsRejected) {
  EXPECT_THROW(eigenfunction_decay(free_box(20), 1.0), EigenvalueProximity);
}
