#pragma once

/// Band/gap structure of the periodic background and its Floquet data.

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <sstream>
#include <vector>

#include "alloy1d/detail/roots.hpp"
#include "alloy1d/transfer.hpp"

namespace alloy1d {

/// Trace of the background cell matrix g_0(z).
inline cplx discriminant(const ModelConfig& model, cplx z) { return cell_transfer(model.v_per, z).trace(); }
inline double discriminant(const ModelConfig& model, double lambda) {
  return cell_transfer(model.v_per, lambda).trace();
}

struct Interval {
  double left = 0.0;
  double right = 0.0;

  double width() const noexcept { return right - left; }
  double mid() const noexcept { return 0.5 * (left + right); }
  bool contains(double x) const noexcept { return x >= left && x <= right; }
};

enum class Region { band, gap };

struct BandStructure {
  /// Connected pieces of {|D| <= 2} inside the scan range; closed gaps do not split them.
  std::vector<Interval> bands;
  /// Open gaps {|D| > 2}; a gap touching the lower scan end may continue below it.
  std::vector<Interval> gaps;
  /// Closed gaps: points where |D| touches 2 without crossing.
  std::vector<double> closed_gaps;
  /// Every band edge found (crossings and tangencies), ascending.
  std::vector<double> edges;
  Interval scan_range;
  double edge_tolerance = 1e-6;

  /// Maximal intervals with |D| < 2: bands split at closed gaps.
  std::vector<Interval> stability_intervals() const {
    std::vector<Interval> out;
    for (const Interval& b : bands) {
      double left = b.left;
      for (double t : closed_gaps)
        if (t > b.left && t < b.right) {
          out.push_back({left, t});
          left = t;
        }
      out.push_back({left, b.right});
    }
    return out;
  }

  /// Distance from lambda to the nearest edge (infinity if none).
  double edge_distance(double lambda) const {
    double best = INFINITY;
    for (double e : edges) best = std::min(best, std::abs(lambda - e));
    return best;
  }

  std::optional<Region> region(double lambda) const {
    for (const Interval& b : bands)
      if (b.contains(lambda)) return Region::band;
    for (const Interval& g : gaps)
      if (g.contains(lambda)) return Region::gap;
    return std::nullopt;
  }

  /// Stability interval containing lambda, if any.
  std::optional<Interval> stability_interval(double lambda) const {
    for (const Interval& s : stability_intervals())
      if (lambda > s.left && lambda < s.right) return s;
    return std::nullopt;
  }
};

/// Grid scan of D(lambda) -/+ 2 with bisection refinement of every edge.
inline BandStructure band_structure(const ModelConfig& model, double lambda_min, double lambda_max,
                                    double scan_step, double edge_tol = 1e-6) {
  if (!(lambda_min < lambda_max)) throw InvalidInput("band_structure: lambda_min must be < lambda_max");
  if (!(scan_step > 0.0)) throw InvalidInput("band_structure: scan_step must be positive");

  const auto n_cells = static_cast<std::size_t>(std::ceil((lambda_max - lambda_min) / scan_step));
  const double h = (lambda_max - lambda_min) / static_cast<double>(n_cells);
  std::vector<double> grid(n_cells + 1);
  std::vector<double> D(n_cells + 1);
  for (std::size_t k = 0; k <= n_cells; ++k) {
    grid[k] = k == n_cells ? lambda_max : lambda_min + static_cast<double>(k) * h;
    D[k] = discriminant(model, grid[k]);
  }

  std::vector<double> crossings;
  std::vector<double> tangencies;
  for (const double sign : {1.0, -1.0}) {
    // F = D - 2 (sign=+1) or -(D + 2) (sign=-1); bands sit where F < 0.
    auto F = [&](double x) { return sign * discriminant(model, x) - 2.0; };
    std::vector<double> Fk(D.size());
    for (std::size_t k = 0; k < D.size(); ++k) Fk[k] = sign * D[k] - 2.0;

    for (std::size_t k = 0; k < n_cells; ++k) {
      if (Fk[k] == 0.0 && k > 0) crossings.push_back(grid[k]);
      if (Fk[k] * Fk[k + 1] < 0.0) crossings.push_back(detail::bisect(F, grid[k], grid[k + 1], edge_tol * 1e-3));
    }
    // Extrema that stay on one side at the grid but may touch or cross in between.
    for (std::size_t k = 1; k < n_cells; ++k) {
      const double a = Fk[k - 1], b = Fk[k], c = Fk[k + 1];
      if (a < 0.0 && b < 0.0 && c < 0.0 && b >= a && b >= c) {
        const detail::Extremum e = detail::golden_max(F, grid[k - 1], grid[k + 1], edge_tol * 1e-3);
        if (std::abs(e.value) <= edge_tol) {
          tangencies.push_back(e.x);
        } else if (e.value > 0.0) {
          crossings.push_back(detail::bisect(F, grid[k - 1], e.x, edge_tol * 1e-3));
          crossings.push_back(detail::bisect(F, e.x, grid[k + 1], edge_tol * 1e-3));
        }
      } else if (a > 0.0 && b > 0.0 && c > 0.0 && b <= a && b <= c) {
        const detail::Extremum e = detail::golden_min(F, grid[k - 1], grid[k + 1], edge_tol * 1e-3);
        if (e.value < -edge_tol) {
          crossings.push_back(detail::bisect(F, grid[k - 1], e.x, edge_tol * 1e-3));
          crossings.push_back(detail::bisect(F, e.x, grid[k + 1], edge_tol * 1e-3));
        }
      }
    }
  }
  // A band narrower than one scan cell: both D - 2 and D + 2 change sign in the cell.
  for (std::size_t k = 0; k < n_cells; ++k) {
    const bool up = (D[k] - 2.0) * (D[k + 1] - 2.0) < 0.0;
    const bool down = (D[k] + 2.0) * (D[k + 1] + 2.0) < 0.0;
    if (up && down) {
      std::ostringstream msg;
      msg << "edges of both signs of D -/+ 2 inside scan cell [" << grid[k] << ", " << grid[k + 1]
          << "]; reduce scan_step";
      throw ScanTooCoarse(msg.str());
    }
  }

  std::sort(crossings.begin(), crossings.end());
  crossings.erase(std::unique(crossings.begin(), crossings.end(),
                              [edge_tol](double x, double y) { return y - x <= edge_tol * 1e-3; }),
                  crossings.end());
  std::sort(tangencies.begin(), tangencies.end());

  BandStructure bs;
  bs.scan_range = {lambda_min, lambda_max};
  bs.edge_tolerance = edge_tol;

  std::vector<double> cuts{lambda_min};
  for (double x : crossings)
    if (x - lambda_min > edge_tol && lambda_max - x > edge_tol) cuts.push_back(x);
  cuts.push_back(lambda_max);

  std::vector<std::pair<Interval, Region>> pieces;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const Interval iv{cuts[i], cuts[i + 1]};
    const Region r = std::abs(discriminant(model, iv.mid())) < 2.0 ? Region::band : Region::gap;
    if (!pieces.empty() && pieces.back().second == r)
      pieces.back().first.right = iv.right;
    else
      pieces.emplace_back(iv, r);
  }
  for (const auto& [iv, r] : pieces) (r == Region::band ? bs.bands : bs.gaps).push_back(iv);

  for (double t : tangencies) {
    for (const Interval& b : bs.bands)
      if (t > b.left && t < b.right) {
        bs.closed_gaps.push_back(t);
        break;
      }
  }
  for (std::size_t i = 1; i < cuts.size() - 1; ++i) bs.edges.push_back(cuts[i]);
  bs.edges.insert(bs.edges.end(), bs.closed_gaps.begin(), bs.closed_gaps.end());
  std::sort(bs.edges.begin(), bs.edges.end());
  return bs;
}

// ---------------------------------------------------------------------------
// Floquet data

struct FloquetData {
  double lambda = 0.0;
  Region region = Region::band;
  /// In a band the branch with |rho_+(lambda + i eta)| < 1; in a gap |rho_+| < 1 < |rho_-|.
  cplx rho_plus;
  cplx rho_minus;
  /// Second components of the eigenvectors (1, c_{+/-}).
  cplx c_plus;
  cplx c_minus;
  /// Angle in (0, pi) of rho_+ or of its conjugate (band only).
  std::optional<double> rotation;
  /// +1 if Im rho_+ > 0 on this stability interval, -1 if rho_+ had to be conjugated.
  int branch_id = 0;
  TransferMatrix g0;
};

inline constexpr double kProbeEta = 1e-6;

namespace detail {

inline std::pair<cplx, cplx> multipliers(cplx D) {
  const cplx root = std::sqrt(D * D - 4.0);
  return {(D + root) / 2.0, (D - root) / 2.0};
}

/// Sign of Im rho_+ on the stability interval containing `ref`.
inline int band_branch_sign(const ModelConfig& model, double ref, double eta) {
  const auto [r1, r2] = multipliers(discriminant(model, cplx(ref, eta)));
  const cplx probe = std::abs(r1) < std::abs(r2) ? r1 : r2;
  const double D = discriminant(model, ref);
  const double im = std::sqrt(std::max(0.0, 4.0 - D * D)) / 2.0;
  const cplx up(D / 2.0, im), down(D / 2.0, -im);
  return std::abs(probe - up) <= std::abs(probe - down) ? 1 : -1;
}

}  // namespace detail

inline FloquetData floquet_data(const ModelConfig& model, double lambda, const BandStructure& bs,
                                double eta = kProbeEta) {
  if (bs.edge_distance(lambda) <= bs.edge_tolerance) {
    std::ostringstream msg;
    msg << "lambda = " << lambda << " within " << bs.edge_tolerance << " of a band edge";
    throw TooCloseToEdge(msg.str());
  }
  FloquetData fd;
  fd.lambda = lambda;
  fd.g0 = cell_transfer(model.v_per, lambda);
  const double D = fd.g0.trace();
  const double uN = fd.g0.a;
  const double uD = fd.g0.b;

  if (std::abs(D) < 2.0) {
    const std::optional<Interval> si = bs.stability_interval(lambda);
    const double ref = si ? std::clamp(si->mid(), bs.scan_range.left, bs.scan_range.right) : lambda;
    const int sign = detail::band_branch_sign(model, ref, eta);
    const double im = std::sqrt(4.0 - D * D) / 2.0;
    fd.region = Region::band;
    fd.rho_plus = cplx(D / 2.0, sign * im);
    fd.rho_minus = std::conj(fd.rho_plus);
    fd.branch_id = sign;
    fd.rotation = std::arg(sign > 0 ? fd.rho_plus : fd.rho_minus);
  } else {
    if (std::abs(uD) < 1e-12) {
      std::ostringstream msg;
      msg << "u_D(1/2, " << lambda << ") vanishes: Dirichlet eigenvalue of the background cell";
      throw DirichletResonance(msg.str());
    }
    const double big = (D + std::copysign(std::sqrt(D * D - 4.0), D)) / 2.0;
    fd.region = Region::gap;
    fd.rho_plus = 1.0 / big;
    fd.rho_minus = big;
    fd.branch_id = 0;
  }
  fd.c_plus = (fd.rho_plus - uN) / uD;
  fd.c_minus = (fd.rho_minus - uN) / uD;
  return fd;
}

}  // namespace alloy1d
