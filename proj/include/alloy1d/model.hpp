#pragma once

/// Random alloy model on the line: a period-1 background, a single-site
/// potential supported in one cell, and an atomic coupling distribution.
/// Potentials are step functions so that every propagator downstream has a
/// closed form.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "alloy1d/errors.hpp"

namespace alloy1d {

/// Breakpoints closer than this are treated as coincident when grids merge.
inline constexpr double kBreakpointTolerance = 1e-12;

/// Step function on [x_start, x_start + sum(widths)].
struct PiecewisePotential {
  double x_start = -0.5;
  std::vector<double> widths;
  std::vector<double> values;

  static PiecewisePotential constant(double value, double x_start = -0.5, double length = 1.0) {
    return {x_start, {length}, {value}};
  }

  std::size_t size() const noexcept { return widths.size(); }

  double length() const noexcept { return std::accumulate(widths.begin(), widths.end(), 0.0); }

  double x_end() const noexcept { return x_start + length(); }

  /// Left endpoints of every piece followed by the right end of the last.
  std::vector<double> breakpoints() const {
    std::vector<double> pts;
    pts.reserve(widths.size() + 1);
    double x = x_start;
    pts.push_back(x);
    for (double w : widths) {
      x += w;
      pts.push_back(x);
    }
    return pts;
  }

  /// Value at x; at a breakpoint the piece on the right wins.
  double value_at(double x) const {
    double left = x_start;
    for (std::size_t i = 0; i < widths.size(); ++i) {
      const double right = left + widths[i];
      if (x < right || i + 1 == widths.size()) return values[i];
      left = right;
    }
    return 0.0;
  }

  /// Integral of |V(t) + shift| over the support.
  double abs_integral(double shift = 0.0) const {
    double total = 0.0;
    for (std::size_t i = 0; i < widths.size(); ++i) total += widths[i] * std::abs(values[i] + shift);
    return total;
  }

  bool is_zero() const {
    return std::all_of(values.begin(), values.end(), [](double v) { return v == 0.0; });
  }

  /// Throws InvalidInput naming the first violated invariant.
  void validate(const std::string& path, double expected_length) const {
    if (widths.empty()) throw InvalidInput(path + ".widths: must not be empty");
    if (widths.size() != values.size())
      throw InvalidInput(path + ".values: length " + std::to_string(values.size()) +
                         " does not match widths length " + std::to_string(widths.size()));
    for (std::size_t i = 0; i < widths.size(); ++i) {
      if (!(widths[i] > 0.0) || !std::isfinite(widths[i]))
        throw InvalidInput(path + ".widths[" + std::to_string(i) + "]: width must be positive");
      if (!std::isfinite(values[i]))
        throw InvalidInput(path + ".values[" + std::to_string(i) + "]: value must be finite");
    }
    if (std::abs(length() - expected_length) > 1e-12)
      throw InvalidInput(path + ".widths: widths sum to " + std::to_string(length()) +
                         ", expected " + std::to_string(expected_length));
  }
};

/// Pointwise combination `op(a(x), b(x))` on the sorted union of both grids.
/// Both potentials must describe the same interval.
template <class Op>
PiecewisePotential merge_potentials(const PiecewisePotential& a, const PiecewisePotential& b, Op op) {
  std::vector<double> pts = a.breakpoints();
  const std::vector<double> pb = b.breakpoints();
  pts.insert(pts.end(), pb.begin(), pb.end());
  std::sort(pts.begin(), pts.end());
  std::vector<double> grid;
  for (double x : pts)
    if (grid.empty() || x - grid.back() > kBreakpointTolerance) grid.push_back(x);
  // Snap the outer ends to a's interval.
  grid.front() = a.x_start;
  grid.back() = std::max(grid.back(), a.x_end());

  PiecewisePotential out;
  out.x_start = grid.front();
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const double mid = 0.5 * (grid[i] + grid[i + 1]);
    out.widths.push_back(grid[i + 1] - grid[i]);
    out.values.push_back(op(a.value_at(mid), b.value_at(mid)));
  }
  return out;
}

/// `v + scale * f` on the merged grid.
inline PiecewisePotential add_scaled(const PiecewisePotential& v, const PiecewisePotential& f, double scale) {
  return merge_potentials(v, f, [scale](double x, double y) { return x + scale * y; });
}

inline PiecewisePotential scaled(PiecewisePotential p, double scale) {
  for (double& v : p.values) v *= scale;
  return p;
}

struct Atom {
  double value = 0.0;
  double probability = 0.0;
};

/// Finitely supported coupling distribution.
struct CouplingDistribution {
  std::vector<Atom> atoms;

  static CouplingDistribution bernoulli(double p_one = 0.5) {
    return {{{0.0, 1.0 - p_one}, {1.0, p_one}}};
  }
  static CouplingDistribution point_mass(double value) { return {{{value, 1.0}}}; }

  /// Distinct atom values carrying positive probability, sorted.
  std::vector<double> support() const {
    std::vector<double> s;
    for (const Atom& a : atoms)
      if (a.probability > 0.0) s.push_back(a.value);
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    return s;
  }

  bool non_trivial() const { return support().size() >= 2; }

  bool has_value(double q) const {
    return std::any_of(atoms.begin(), atoms.end(), [q](const Atom& a) { return a.value == q; });
  }

  /// Inverse CDF over the atoms in declaration order, for u in [0, 1).
  double quantile(double u) const {
    double cumulative = 0.0;
    double last_positive = atoms.front().value;
    for (const Atom& a : atoms) {
      if (a.probability <= 0.0) continue;
      last_positive = a.value;
      cumulative += a.probability;
      if (u < cumulative) return a.value;
    }
    return last_positive;
  }

  void validate(const std::string& path) const {
    if (atoms.empty()) throw InvalidInput(path + ".atoms: at least one atom required");
    double total = 0.0;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      const Atom& a = atoms[i];
      if (!std::isfinite(a.value))
        throw InvalidInput(path + ".atoms[" + std::to_string(i) + "][0]: value must be finite");
      if (!(a.probability >= 0.0) || !std::isfinite(a.probability))
        throw InvalidInput(path + ".atoms[" + std::to_string(i) + "][1]: probability must be >= 0");
      total += a.probability;
    }
    if (std::abs(total - 1.0) > 1e-12)
      throw InvalidInput(path + ".atoms: probabilities sum to " + std::to_string(total) + ", expected 1");
  }
};

/// H = -d^2/dx^2 + V_per + sum_n q_n f(x - n).
struct ModelConfig {
  PiecewisePotential v_per = PiecewisePotential::constant(0.0);
  PiecewisePotential f = PiecewisePotential::constant(1.0);
  CouplingDistribution mu = CouplingDistribution::bernoulli();
  bool normalized = false;

  void validate() const {
    v_per.validate("$.v_per", 1.0);
    f.validate("$.f", 1.0);
    mu.validate("$.mu");
    if (std::abs(v_per.x_start + 0.5) > kBreakpointTolerance)
      throw InvalidInput("$.v_per: cell must start at -1/2");
    if (std::abs(f.x_start + 0.5) > kBreakpointTolerance)
      throw InvalidInput("$.f: support must start at -1/2");
    if (normalized && !(mu.has_value(0.0) && mu.has_value(1.0)))
      throw InvalidInput("$.mu: normalized model must contain atoms 0 and 1");
  }
};

/// Shifts the smallest support point to 0 and the largest to 1, absorbing the
/// shift into the background and the spread into f.
inline ModelConfig normalize_support(const ModelConfig& model) {
  const std::vector<double> supp = model.mu.support();
  if (supp.size() < 2)
    throw SingleAtomDistribution("coupling distribution has fewer than two distinct atoms");
  const double lo = supp.front();
  const double hi = supp.back();
  ModelConfig out = model;
  out.normalized = true;
  if (lo == 0.0 && hi == 1.0) return out;

  out.v_per = lo == 0.0 ? model.v_per : add_scaled(model.v_per, model.f, lo);
  out.f = scaled(model.f, hi - lo);
  for (Atom& a : out.mu.atoms) a.value = (a.value - lo) / (hi - lo);
  return out;
}

/// V_per + q f restricted to the reference cell [-1/2, 1/2].
inline PiecewisePotential cell_potential(const ModelConfig& model, double q) {
  if (q == 0.0) return model.v_per;
  return add_scaled(model.v_per, model.f, q);
}

// ---------------------------------------------------------------------------
// Counter-based sampling

namespace detail {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Uniform in [0, 1) from the top 53 bits.
inline constexpr double to_unit(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace detail

/// Pure function of its three arguments.
inline std::uint64_t counter_hash(std::uint64_t master_seed, std::uint64_t sample_index,
                                  std::int64_t n) noexcept {
  using detail::splitmix64;
  const std::uint64_t inner = splitmix64(static_cast<std::uint64_t>(n) ^ 0xd1b54a32d192ed03ULL);
  return splitmix64(master_seed ^ splitmix64(sample_index ^ inner));
}

/// Independent seed for a sub-stream (e.g. one energy of a grid).
inline std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t stream) noexcept {
  return detail::splitmix64(master_seed ^ detail::splitmix64(stream + 0x632be59bd9b4e019ULL));
}

inline double draw_coupling(const CouplingDistribution& mu, std::uint64_t master_seed,
                            std::uint64_t sample_index, std::int64_t n) {
  return mu.quantile(detail::to_unit(counter_hash(master_seed, sample_index, n)));
}

/// Couplings q_n for n in [index_offset, index_offset + couplings.size()).
struct Configuration {
  std::vector<double> couplings;
  std::int64_t index_offset = 0;
  std::uint64_t seed_record = 0;

  std::int64_t first_index() const noexcept { return index_offset; }
  std::int64_t last_index() const noexcept {
    return index_offset + static_cast<std::int64_t>(couplings.size()) - 1;
  }
  bool covers(std::int64_t first, std::int64_t last) const noexcept {
    return first >= first_index() && last <= last_index();
  }
  double at(std::int64_t n) const { return couplings.at(static_cast<std::size_t>(n - index_offset)); }

  static Configuration constant(double q, std::int64_t first, std::int64_t last) {
    return {std::vector<double>(static_cast<std::size_t>(last - first + 1), q), first, 0};
  }
};

inline Configuration sample_configuration(const ModelConfig& model, std::int64_t n_first, std::int64_t n_last,
                                          std::uint64_t master_seed, std::uint64_t sample_index) {
  if (n_first > n_last) throw InvalidInput("sample_configuration: n_first > n_last");
  Configuration c;
  c.index_offset = n_first;
  c.seed_record = master_seed;
  c.couplings.reserve(static_cast<std::size_t>(n_last - n_first + 1));
  for (std::int64_t n = n_first; n <= n_last; ++n)
    c.couplings.push_back(draw_coupling(model.mu, master_seed, sample_index, n));
  return c;
}

}  // namespace alloy1d
