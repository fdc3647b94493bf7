#pragma once

/// Acceptance criteria 1-10, shared by the acceptance test binary and the
/// `selftest` subcommand. Every run is pinned (seeds, sizes), so repeated
/// invocations print identical tables apart from timings.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "alloy1d/lyapunov.hpp"
#include "alloy1d/reference_models.hpp"
#include "alloy1d/scattering.hpp"
#include "alloy1d/spectra.hpp"

namespace alloy1d {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
  double time_limit = 0.0;
};

struct AcceptanceOptions {
  /// Multiplies every tolerance; values below 1 tighten, 0 forces failures.
  double tolerance_scale = 1.0;
  unsigned workers = 1;
  /// Runs only these criteria (all when empty).
  std::vector<int> only;
};

inline constexpr std::uint64_t kAcceptanceSeed = 20240917;

namespace acceptance {

inline const double kPi2 = kPi * kPi;

inline std::string fmt(double x) {
  std::ostringstream s;
  s << std::setprecision(6) << x;
  return s.str();
}

/// Uniform energies in the stability intervals of `bs`, avoiding a relative
/// collar of 1e-3 around every edge.
inline std::vector<double> band_energies(const BandStructure& bs, std::size_t count, std::uint64_t seed) {
  std::vector<Interval> ivs;
  std::vector<double> widths;
  for (const Interval& s : bs.stability_intervals()) {
    const double c = 1e-3 * s.width();
    ivs.push_back({s.left + c, s.right - c});
    widths.push_back(ivs.back().width());
  }
  std::mt19937_64 rng(seed);
  std::discrete_distribution<std::size_t> pick(widths.begin(), widths.end());
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> out;
  for (std::size_t i = 0; i < count; ++i) {
    const Interval& iv = ivs[pick(rng)];
    out.push_back(iv.left + u(rng) * iv.width());
  }
  return out;
}

inline CriterionResult critical_energies(const AcceptanceOptions& o) {
  CriterionResult r{1, "critical energies 1+pi^2 and 1+4pi^2 reported as b roots", false, "", 0.0, 10.0};
  const CriticalSet cs = critical_set(reference::square_well(), 0.5, 60.0, 0.01);
  const std::vector<double> roots = cs.energies(CriticalKind::b_root);
  double worst = 0.0;
  for (double target : {1.0 + kPi2, 1.0 + 4.0 * kPi2}) {
    double err = INFINITY;
    for (double x : roots) err = std::min(err, std::abs(x - target));
    worst = std::max(worst, err);
  }
  r.pass = worst <= 1e-6 * o.tolerance_scale;
  r.detail = std::to_string(roots.size()) + " b roots, max error " + fmt(worst);
  return r;
}

inline CriterionResult zero_exponent(const AcceptanceOptions& o) {
  CriterionResult r{2, "zero Lyapunov exponent at 1+pi^2, positive at +/-0.5", false, "", 0.0, 60.0};
  const ModelConfig m = reference::square_well();
  SamplingOptions so;
  so.workers = o.workers;
  so.burn_in = 1000;
  const double c = 1.0 + kPi2;
  const auto prof = lyapunov_profile(m, {c - 0.5, c, c + 0.5}, 10000, 100, kAcceptanceSeed, so);
  const LyapunovEstimate& mid = prof[1];
  const bool zero = std::abs(mid.mean) <= 3.0 * mid.std_error * o.tolerance_scale;
  const double need = 5.0 * (std::abs(mid.mean) + mid.std_error);
  const bool below = prof[0].mean >= need;
  const bool above = prof[2].mean >= need;
  r.pass = zero && below && above;
  r.detail = "critical " + fmt(mid.mean) + " +/- " + fmt(mid.std_error) + (zero ? " (zero ok)" : " (NOT zero)") +
             "; need >= " + fmt(need) + ": -0.5 -> " + fmt(prof[0].mean) + (below ? " ok" : " LOW") + ", +0.5 -> " +
             fmt(prof[2].mean) + (above ? " ok" : " LOW");
  return r;
}

inline CriterionResult scattering_identity(const AcceptanceOptions& o) {
  CriterionResult r{3, "|a|^2 - |b|^2 = 1 on 500 band energies", false, "", 0.0, 0.0};
  double worst = 0.0;
  std::size_t failures = 0, n = 0;
  std::uint64_t seed = kAcceptanceSeed;
  for (const ModelConfig& m : {reference::square_well(), reference::kronig_penney()}) {
    const BandStructure bs = band_structure(m, -5.0, 80.0, 0.01);
    for (double l : band_energies(bs, 250, ++seed)) {
      ++n;
      try {
        const ScatteringCoefficients sc = band_coefficients(m, l, bs);
        worst = std::max(worst, std::abs(std::norm(sc.a) - std::norm(sc.b) - 1.0));
      } catch (const Error&) {
        ++failures;
      }
    }
  }
  r.pass = failures == 0 && worst <= 1e-8 * o.tolerance_scale;
  r.detail = std::to_string(n) + " energies, max deviation " + fmt(worst) + ", errors " + std::to_string(failures);
  return r;
}

inline CriterionResult conjugation(const AcceptanceOptions& o) {
  CriterionResult r{4, "g1 = C g0~ s C^-1 on 200 band energies", false, "", 0.0, 0.0};
  double worst = 0.0;
  std::size_t failures = 0, n = 0;
  std::uint64_t seed = kAcceptanceSeed + 100;
  for (const ModelConfig& m : {reference::square_well(), reference::kronig_penney()}) {
    const BandStructure bs = band_structure(m, -5.0, 80.0, 0.01);
    for (double l : band_energies(bs, 100, ++seed)) {
      ++n;
      try {
        const ConjugationDecomposition d = conjugation_decomposition(m, l, bs);
        worst = std::max(worst, max_abs_entry(d.g1() - perturbed_cell(m, l)));
        worst = std::max(worst, max_abs_entry(d.g0() - cell_transfer(m.v_per, l)));
      } catch (const Error&) {
        ++failures;
      }
    }
  }
  r.pass = failures == 0 && worst <= 1e-8 * o.tolerance_scale;
  r.detail = std::to_string(n) + " energies, max entry error " + fmt(worst) + ", errors " + std::to_string(failures);
  return r;
}

inline CriterionResult bounds(const AcceptanceOptions& o) {
  CriterionResult r{5, "unimodularity, growth and Lipschitz bounds on 1000 triples", false, "", 0.0, 0.0};
  std::mt19937_64 rng(kAcceptanceSeed + 5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_det = 0.0;
  std::size_t growth_violations = 0, lipschitz_violations = 0;
  for (int t = 0; t < 1000; ++t) {
    PiecewisePotential p;
    const int pieces = 1 + static_cast<int>(u(rng) * 6);
    std::vector<double> cuts{0.0, 1.0};
    for (int i = 1; i < pieces; ++i) cuts.push_back(u(rng));
    std::sort(cuts.begin(), cuts.end());
    for (int i = 0; i < pieces; ++i) {
      const double w = cuts[i + 1] - cuts[i];
      if (w <= 1e-9) continue;
      p.widths.push_back(w);
      p.values.push_back(-20.0 + 40.0 * u(rng));
    }
    const double l = -20.0 + 80.0 * u(rng);
    const double lp = l + (2.0 * u(rng) - 1.0);
    const TransferMatrix g = cell_transfer(p, l), gp = cell_transfer(p, lp);
    worst_det = std::max({worst_det, std::abs(g.det() - 1.0), std::abs(gp.det() - 1.0)});
    const double gb = growth_bound(p, l) * (1.0 + 1e-12);
    const double n2 = operator_norm(g) * operator_norm(g);
    const double ni2 = operator_norm(g.sl_inverse()) * operator_norm(g.sl_inverse());
    if (n2 > gb || ni2 > gb) ++growth_violations;
    if (operator_norm(g - gp) > lipschitz_bound(p, l, lp) * (1.0 + 1e-12)) ++lipschitz_violations;
  }
  r.pass = worst_det <= 1e-10 * o.tolerance_scale && growth_violations == 0 && lipschitz_violations == 0;
  r.detail = "max |det - 1| " + fmt(worst_det) + ", growth violations " + std::to_string(growth_violations) +
             ", Lipschitz violations " + std::to_string(lipschitz_violations);
  return r;
}

inline CriterionResult free_exactness(const AcceptanceOptions& o) {
  CriterionResult r{6, "free model: counts, IDS at pi^2, Green's function", false, "", 0.0, 0.0};
  const ModelConfig m = reference::free_line();
  std::mt19937_64 rng(kAcceptanceSeed + 6);
  std::uniform_int_distribution<std::int64_t> len(1, 200);
  std::uniform_real_distribution<double> en(0.0, 100.0);
  std::size_t count_mismatch = 0;
  for (int t = 0; t < 100; ++t) {
    const std::int64_t L = len(rng);
    const double l = en(rng);
    const std::int64_t expected = static_cast<std::int64_t>(std::floor(static_cast<double>(L) * std::sqrt(l) / kPi));
    if (eigenvalue_count(m, box_configuration(m, L, 0, 0), L, l) != expected) ++count_mismatch;
  }
  const IDSTable ids = ids_estimate(m, {kPi2}, 120, 1, kAcceptanceSeed);
  const double ids_err = std::abs(ids.values[0] - 1.0);
  const Configuration c = box_configuration(m, 40, 0, 0);
  double green_err = 0.0;
  for (auto [x, y] : {std::pair{1.0, 0.0}, {0.0, 1.0}, {-3.5, 7.25}, {19.0, -19.5}}) {
    const double hi = std::max(x, y), lo = std::min(x, y);
    const double exact = std::sinh(20.0 - hi) * std::sinh(lo + 20.0) / std::sinh(40.0);
    green_err = std::max(green_err, std::abs(green_function(m, c, 40, -1.0, x, y) - exact));
  }
  r.pass = count_mismatch == 0 && ids_err <= 0.02 * o.tolerance_scale && green_err <= 1e-6 * o.tolerance_scale;
  r.detail = "count mismatches " + std::to_string(count_mismatch) + ", |N(pi^2) - 1| " + fmt(ids_err) +
             ", Green max error " + fmt(green_err);
  return r;
}

inline CriterionResult thouless(const AcceptanceOptions& o) {
  CriterionResult r{7, "Thouless identity on the free model", false, "", 0.0, 60.0};
  const ModelConfig m = reference::free_line();
  std::vector<double> grid;
  for (int i = 0; i <= 8000; ++i) grid.push_back(0.05 * i);
  const IDSTable ids = ids_estimate(m, grid, 1000, 1, kAcceptanceSeed, o.workers);
  std::vector<double> energies;
  for (int i = 0; i <= 12; ++i) energies.push_back(-4.0 + 0.25 * i);
  for (int i = 0; i <= 32; ++i) energies.push_back(1.0 + 0.25 * i);
  std::vector<LyapunovEstimate> gamma = lyapunov_profile(m, energies, 10000, 1, kAcceptanceSeed);
  const std::vector<Interval> window{{-4.0, -1.0}, {1.0, 9.0}};
  const ThoulessResult clean = thouless_check(gamma, ids, window);
  gamma[0].mean *= 2.0;
  const ThoulessResult corrupt = thouless_check(gamma, ids, window);
  const double raise = corrupt.max_residual - clean.max_residual;
  r.pass = clean.max_residual <= 0.05 * o.tolerance_scale && raise >= 0.3;
  r.detail = "alpha " + fmt(clean.alpha) + ", max residual " + fmt(clean.max_residual) + ", corrupted raise " +
             fmt(raise);
  return r;
}

inline CriterionResult wegner(const AcceptanceOptions& o) {
  CriterionResult r{8, "Wegner fraction nonincreasing over L = 33, 63, 93", false, "", 0.0, 300.0};
  const ModelConfig m = reference::square_well();
  std::vector<double> f;
  for (std::int64_t L : {33, 63, 93})
    f.push_back(wegner_probability(m, 5.0, L, 0.5, 0.5, 500, kAcceptanceSeed, o.workers).fraction);
  bool ok = true;
  for (std::size_t i = 0; i + 1 < f.size(); ++i) {
    const double sd = std::sqrt((f[i] * (1 - f[i]) + f[i + 1] * (1 - f[i + 1])) / 500.0);
    ok = ok && f[i + 1] <= f[i] + 2.0 * sd * o.tolerance_scale;
  }
  r.pass = ok;
  r.detail = "fractions " + fmt(f[0]) + ", " + fmt(f[1]) + ", " + fmt(f[2]);
  return r;
}

inline CriterionResult good_box(const AcceptanceOptions& o) {
  CriterionResult r{9, "good-box contrast at L = 45: lambda = 5 vs 1+pi^2", false, "", 0.0, 300.0};
  const ModelConfig m = reference::square_well();
  const GoodBoxResult off = good_box_probability(m, 5.0, 0.05, 45, 200, kAcceptanceSeed, o.workers);
  const GoodBoxResult crit = good_box_probability(m, 1.0 + kPi2, 0.05, 45, 200, kAcceptanceSeed, o.workers);
  const double contrast = off.fraction - crit.fraction;
  r.pass = contrast >= 0.3;
  r.detail = "fraction at 5: " + fmt(off.fraction) + ", at 1+pi^2: " + fmt(crit.fraction) + ", contrast " +
             fmt(contrast) + " (need >= 0.3)";
  return r;
}

inline CriterionResult furstenberg(const AcceptanceOptions& o) {
  CriterionResult r{10, "invariant-measure formula matches the Lyapunov estimate", false, "", 0.0, 0.0};
  const ModelConfig m = reference::square_well();
  const std::vector<double> energies{0.5, 1.5, 5.0, 15.0, 30.0};
  const CriticalSet cs = critical_set(m, -5.0, 60.0, 0.01);
  SamplingOptions so;
  so.workers = o.workers;
  const auto prof = lyapunov_profile(m, energies, 10000, 100, kAcceptanceSeed, so);
  bool ok = true;
  std::ostringstream d;
  for (std::size_t i = 0; i < energies.size(); ++i) {
    const FurstenbergEstimate f = furstenberg_estimate(m, energies[i], kDefaultBurnIn, 10000, 20,
                                                       derive_seed(kAcceptanceSeed, 100 + i), o.workers);
    const double se = std::sqrt(f.std_error * f.std_error + prof[i].std_error * prof[i].std_error);
    const double z = std::abs(f.mean - prof[i].mean) / se;
    const bool agree = z <= 3.0 * o.tolerance_scale;
    const bool noncritical = cs.distance(energies[i]) >= 0.1;
    ok = ok && agree && noncritical;
    d << (i ? "; " : "") << fmt(energies[i]) << ": z " << fmt(z) << (noncritical ? "" : " (too close to M)");
  }
  r.pass = ok;
  r.detail = d.str();
  return r;
}

}  // namespace acceptance

inline std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& o = {}) {
  using Fn = std::function<CriterionResult(const AcceptanceOptions&)>;
  const std::vector<std::pair<int, Fn>> criteria{
      {1, acceptance::critical_energies}, {2, acceptance::zero_exponent}, {3, acceptance::scattering_identity},
      {4, acceptance::conjugation},       {5, acceptance::bounds},        {6, acceptance::free_exactness},
      {7, acceptance::thouless},          {8, acceptance::wegner},        {9, acceptance::good_box},
      {10, acceptance::furstenberg}};
  std::vector<CriterionResult> out;
  for (const auto& [id, fn] : criteria) {
    if (!o.only.empty() && std::find(o.only.begin(), o.only.end(), id) == o.only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    CriterionResult r;
    try {
      r = fn(o);
    } catch (const std::exception& e) {
      r.id = id;
      r.name = "criterion " + std::to_string(id);
      r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (r.time_limit > 0.0 && r.seconds > r.time_limit) {
      r.pass = false;
      r.detail += "; runtime " + acceptance::fmt(r.seconds) + " s exceeds " + acceptance::fmt(r.time_limit) + " s";
    }
    out.push_back(r);
  }
  return out;
}

/// One line per criterion; timings are omitted so that reruns print identical tables.
inline void print_acceptance(std::ostream& os, const std::vector<CriterionResult>& results) {
  for (const CriterionResult& r : results)
    os << (r.pass ? "PASS" : "FAIL") << "  C" << r.id << "  " << r.name << "  [" << r.detail << "]\n";
}

inline bool all_passed(const std::vector<CriterionResult>& results) {
  return std::all_of(results.begin(), results.end(), [](const CriterionResult& r) { return r.pass; });
}

}  // namespace alloy1d
