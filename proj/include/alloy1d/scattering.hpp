#pragma once

/// Scattering at one perturbed cell relative to the periodic background:
/// coefficients a, b in bands, a_i, b_i in gaps, the conjugation of g_1 to a
/// rotation-times-scattering form, and assembly of the exceptional energy set.

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "alloy1d/floquet.hpp"

namespace alloy1d {

struct ScatteringCoefficients {
  double lambda = 0.0;
  cplx a;
  cplx b;
  Region region = Region::band;
  int branch_id = 0;
};

struct GapCoefficients {
  double lambda = 0.0;
  double a1 = 0.0, b1 = 0.0, a2 = 0.0, b2 = 0.0;
  /// Component (0 or 1) fixed to one in v_1 and v_2.
  int v1_unit_component = 0;
  int v2_unit_component = 0;
};

namespace detail {

inline double condition_number(const ComplexTransferMatrix& m) {
  auto fro = [](const ComplexTransferMatrix& x) {
    return std::sqrt(std::norm(x.a) + std::norm(x.b) + std::norm(x.c) + std::norm(x.d));
  };
  const cplx det = m.det();
  if (std::abs(det) == 0.0) return INFINITY;
  return fro(m) * fro(m.inverse());
}

/// Real eigenvector of g for eigenvalue rho, first component one unless it is
/// (relatively) below 1e-10, then second component one.
inline std::pair<Vec2<double>, int> real_eigenvector(const TransferMatrix& g, double rho) {
  Vec2<double> v1{g.b, rho - g.a};
  Vec2<double> v2{rho - g.d, g.c};
  Vec2<double> v = norm(v1) >= norm(v2) ? v1 : v2;
  const double n = norm(v);
  if (std::abs(v.x) >= 1e-10 * n) return {(1.0 / v.x) * v, 0};
  return {(1.0 / v.y) * v, 1};
}

}  // namespace detail

/// The perturbed cell matrix g_1(lambda) (coupling 1 on the reference cell).
inline TransferMatrix perturbed_cell(const ModelConfig& model, double lambda) {
  return cell_transfer(cell_potential(model, 1.0), lambda);
}

/// (a, b) with u_+ = a phi_+ + b phi_- to the right of the perturbed cell,
/// where u_+ = phi_+ to its left. `swap_branch` uses the opposite Floquet
/// branch, which conjugates both coefficients.
inline ScatteringCoefficients band_coefficients(const ModelConfig& model, double lambda, const BandStructure& bs,
                                                bool swap_branch = false) {
  FloquetData fd = floquet_data(model, lambda, bs);
  if (fd.region != Region::band) {
    std::ostringstream msg;
    msg << "band_coefficients: lambda = " << lambda << " is not in a band";
    throw InvalidInput(msg.str());
  }
  if (swap_branch) {
    std::swap(fd.rho_plus, fd.rho_minus);
    std::swap(fd.c_plus, fd.c_minus);
    fd.branch_id = -fd.branch_id;
  }
  const TransferMatrix g1 = perturbed_cell(model, lambda);
  const Vec2<cplx> v_plus{1.0, fd.c_plus};
  const Vec2<cplx> u{g1.a * v_plus.x + g1.b * v_plus.y, g1.c * v_plus.x + g1.d * v_plus.y};
  const ComplexTransferMatrix phi{fd.rho_plus, fd.rho_minus, fd.rho_plus * fd.c_plus, fd.rho_minus * fd.c_minus};
  const double cond = detail::condition_number(phi);
  if (!(cond <= 1e12)) {
    std::ostringstream msg;
    msg << "Floquet basis at lambda = " << lambda << " has condition number " << cond;
    throw SingularBasis(msg.str());
  }
  const Vec2<cplx> ab = phi.inverse() * u;
  return {lambda, ab.x, ab.y, Region::band, fd.branch_id};
}

inline GapCoefficients gap_coefficients(const ModelConfig& model, double lambda, const BandStructure& bs) {
  const TransferMatrix g0 = cell_transfer(model.v_per, lambda);
  const double D = g0.trace();
  if (bs.edge_distance(lambda) <= bs.edge_tolerance || std::abs(D) <= 2.0 + bs.edge_tolerance) {
    std::ostringstream msg;
    msg << "gap_coefficients: lambda = " << lambda << " is not inside a gap away from its edges (D = " << D << ")";
    throw TooCloseToEdge(msg.str());
  }
  const double rho2 = (D + std::copysign(std::sqrt(D * D - 4.0), D)) / 2.0;
  const double rho1 = 1.0 / rho2;
  const auto [v1, k1] = detail::real_eigenvector(g0, rho1);
  const auto [v2, k2] = detail::real_eigenvector(g0, rho2);
  const TransferMatrix g1 = perturbed_cell(model, lambda);
  const TransferMatrix basis_inv = TransferMatrix{v1.x, v2.x, v1.y, v2.y}.inverse();
  const Vec2<double> e1 = basis_inv * (g1 * v1);
  const Vec2<double> e2 = basis_inv * (g1 * v2);
  GapCoefficients gc;
  gc.lambda = lambda;
  gc.a1 = e1.x / rho1;
  gc.b1 = e1.y / rho2;
  gc.b2 = e2.x / rho1;
  gc.a2 = e2.y / rho2;
  gc.v1_unit_component = k1;
  gc.v2_unit_component = k2;
  return gc;
}

struct ConjugationDecomposition {
  TransferMatrix C;
  TransferMatrix g0_tilde;
  TransferMatrix s;

  TransferMatrix g0() const { return C * g0_tilde * C.inverse(); }
  TransferMatrix g1() const { return C * g0_tilde * s * C.inverse(); }
};

/// g_1 = C g0~ s C^{-1} and g_0 = C g0~ C^{-1} with g0~ a rotation and
/// s built from (a, b).
inline ConjugationDecomposition conjugation_decomposition(const ModelConfig& model, double lambda,
                                                          const BandStructure& bs) {
  const FloquetData fd = floquet_data(model, lambda, bs);
  if (fd.region != Region::band) throw InvalidInput("conjugation_decomposition: lambda must lie in a band");
  const ScatteringCoefficients sc = band_coefficients(model, lambda, bs);
  const cplx c = fd.c_plus;
  const cplx rho = fd.rho_plus;
  const cplx sum = sc.a + sc.b;
  const cplx diff = sc.a - sc.b;
  return {{1.0, 0.0, c.real(), c.imag()},
          {rho.real(), rho.imag(), -rho.imag(), rho.real()},
          {sum.real(), sum.imag(), -diff.imag(), diff.real()}};
}

// ---------------------------------------------------------------------------
// Exceptional set

enum class CriticalKind { b_root, d_zero, band_edge, gap_coeff_root };

inline const char* to_string(CriticalKind k) {
  switch (k) {
    case CriticalKind::b_root: return "b_root";
    case CriticalKind::d_zero: return "d_zero";
    case CriticalKind::band_edge: return "band_edge";
    case CriticalKind::gap_coeff_root: return "gap_coeff_root";
  }
  return "?";
}

struct CriticalEntry {
  double lambda = 0.0;
  CriticalKind kind = CriticalKind::band_edge;
  /// |b|, |D|, the vanishing gap factor, or |D| - 2 at the reported energy.
  double residual = 0.0;
};

struct CriticalSet {
  std::vector<CriticalEntry> entries;
  Interval scan_range;
  double root_tol = 1e-8;
  double edge_tol = 1e-6;

  std::vector<double> energies(CriticalKind kind) const {
    std::vector<double> out;
    for (const CriticalEntry& e : entries)
      if (e.kind == kind) out.push_back(e.lambda);
    return out;
  }

  /// Distance from lambda to the nearest entry.
  double distance(double lambda) const {
    double best = INFINITY;
    for (const CriticalEntry& e : entries) best = std::min(best, std::abs(e.lambda - lambda));
    return best;
  }
};

struct CriticalSetOptions {
  double root_tol = 1e-8;
  double edge_tol = 1e-6;
  /// Samples per stability interval or gap never fall below this count.
  int min_samples = 2000;
};

namespace detail {

/// Abscissae from a + collar to b - collar with spacing at most `step`.
inline std::vector<double> sample_interior(double a, double b, double collar, double step, int min_samples) {
  const double lo = a + collar, hi = b - collar;
  if (!(hi > lo)) return {};
  const double h = std::min(step, (hi - lo) / min_samples);
  const auto n = static_cast<std::size_t>(std::ceil((hi - lo) / h));
  std::vector<double> xs(n + 1);
  for (std::size_t k = 0; k <= n; ++k) xs[k] = k == n ? hi : lo + (hi - lo) * static_cast<double>(k) / n;
  return xs;
}

}  // namespace detail

/// Exceptional energies in [lambda_min, lambda_max]: roots of b and of D in
/// bands, roots of a_1, a_2, b_1 b_2 in gaps, and all band edges.
inline CriticalSet critical_set(const ModelConfig& model, double lambda_min, double lambda_max, double scan_step,
                                const CriticalSetOptions& opt = {}) {
  if (model.f.is_zero())
    throw DegenerateSite("single-site potential is identically zero; b vanishes on every band");
  const BandStructure bs = band_structure(model, lambda_min, lambda_max, scan_step, opt.edge_tol);
  CriticalSet cs;
  cs.scan_range = bs.scan_range;
  cs.root_tol = opt.root_tol;
  cs.edge_tol = opt.edge_tol;

  for (double e : bs.edges)
    cs.entries.push_back({e, CriticalKind::band_edge, std::abs(discriminant(model, e)) - 2.0});

  const double collar = 10.0 * opt.edge_tol;
  const double refine_tol = opt.root_tol * 1e-2;

  for (const Interval& si : bs.stability_intervals()) {
    const std::vector<double> xs = detail::sample_interior(si.left, si.right, collar, scan_step, opt.min_samples);
    if (xs.size() < 3) continue;
    auto abs_b = [&](double x) -> double {
      try {
        return std::abs(band_coefficients(model, x, bs).b);
      } catch (const SingularBasis&) {
        return INFINITY;
      } catch (const TooCloseToEdge&) {
        return INFINITY;
      }
    };
    std::vector<double> bk(xs.size()), Dk(xs.size());
    std::size_t tiny = 0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      bk[k] = abs_b(xs[k]);
      Dk[k] = discriminant(model, xs[k]);
      if (bk[k] < opt.root_tol) ++tiny;
    }
    if (2 * tiny > xs.size()) {
      std::ostringstream msg;
      msg << "|b| < " << opt.root_tol << " on " << tiny << " of " << xs.size() << " samples in band ("
          << si.left << ", " << si.right << ")";
      throw DegenerateSite(msg.str());
    }
    for (std::size_t k = 1; k + 1 < xs.size(); ++k) {
      if (bk[k] <= bk[k - 1] && bk[k] < bk[k + 1]) {
        const detail::Extremum m = detail::golden_min(abs_b, xs[k - 1], xs[k + 1], refine_tol);
        if (m.value <= opt.root_tol) cs.entries.push_back({m.x, CriticalKind::b_root, m.value});
      }
    }
    auto D = [&](double x) { return discriminant(model, x); };
    for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
      if (Dk[k] * Dk[k + 1] < 0.0 || (Dk[k] == 0.0 && k > 0)) {
        const double r = Dk[k] == 0.0 ? xs[k] : detail::bisect(D, xs[k], xs[k + 1], refine_tol);
        cs.entries.push_back({r, CriticalKind::d_zero, std::abs(D(r))});
      }
    }
  }

  for (const Interval& g : bs.gaps) {
    const double left_collar = g.left <= lambda_min ? 0.0 : collar;
    const double right_collar = g.right >= lambda_max ? 0.0 : collar;
    const double lo = g.left + left_collar, hi = g.right - right_collar;
    std::vector<double> xs = detail::sample_interior(lo, hi, 0.0, scan_step, opt.min_samples);
    if (xs.size() < 2) continue;
    // a_1, a_2 and b_1 b_2 do not depend on the eigenvector normalisation.
    auto factors = [&](double x) -> std::array<double, 3> {
      try {
        const GapCoefficients gc = gap_coefficients(model, x, bs);
        return {gc.a1, gc.a2, gc.b1 * gc.b2};
      } catch (const TooCloseToEdge&) {
        return {NAN, NAN, NAN};
      }
    };
    std::vector<std::array<double, 3>> fk(xs.size());
    for (std::size_t k = 0; k < xs.size(); ++k) fk[k] = factors(xs[k]);
    for (int j = 0; j < 3; ++j) {
      auto fj = [&](double x) { return factors(x)[j]; };
      for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
        const double f0 = fk[k][j], f1 = fk[k + 1][j];
        if (!(std::isfinite(f0) && std::isfinite(f1))) continue;
        if (f0 * f1 < 0.0 || (f0 == 0.0 && k > 0)) {
          const double r = f0 == 0.0 ? xs[k] : detail::bisect(fj, xs[k], xs[k + 1], refine_tol);
          cs.entries.push_back({r, CriticalKind::gap_coeff_root, fj(r)});
        }
      }
    }
  }

  std::sort(cs.entries.begin(), cs.entries.end(),
            [](const CriticalEntry& x, const CriticalEntry& y) { return x.lambda < y.lambda; });
  return cs;
}

// ---------------------------------------------------------------------------
// Orbit test

inline double projective_distance(Vec2<double> x, Vec2<double> y) {
  return std::abs(x.x * y.y - x.y * y.x) / (norm(x) * norm(y));
}

/// True iff, for every direction of a mesh over P(R^2), the images under all
/// words of length <= n_words in {g_0, g_1} contain three directions pairwise
/// further apart than 1e-8.
inline bool three_direction_test(const ModelConfig& model, double lambda, int n_words, int mesh_size = 64) {
  const TransferMatrix g0 = cell_transfer(model.v_per, lambda);
  const TransferMatrix g1 = perturbed_cell(model, lambda);
  std::vector<TransferMatrix> words{TransferMatrix::identity()};
  std::size_t begin = 0;
  for (int len = 1; len <= n_words; ++len) {
    const std::size_t end = words.size();
    for (std::size_t i = begin; i < end; ++i) {
      for (const TransferMatrix& g : {g0, g1}) {
        TransferMatrix w = g * words[i];
        const double s = max_abs_entry(w);
        if (s > 1e100) w = (1.0 / s) * w;
        words.push_back(w);
      }
    }
    begin = end;
  }
  constexpr double pi = 3.14159265358979323846;
  for (int m = 0; m < mesh_size; ++m) {
    const double theta = pi * (m + 0.5) / mesh_size;
    const Vec2<double> v{std::cos(theta), std::sin(theta)};
    std::vector<Vec2<double>> distinct;
    for (const TransferMatrix& w : words) {
      const Vec2<double> image = w * v;
      bool fresh = true;
      for (const Vec2<double>& d : distinct)
        if (projective_distance(d, image) <= 1e-8) {
          fresh = false;
          break;
        }
      if (fresh) distinct.push_back(image);
      if (distinct.size() >= 3) break;
    }
    if (distinct.size() < 3) return false;
  }
  return true;
}

}  // namespace alloy1d
