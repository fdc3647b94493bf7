#pragma once

/// Dirichlet boxes [-L/2, L/2]: eigenvalue counting by Pruefer phase,
/// eigenvalues, the integrated density of states, the Thouless identity,
/// Green's functions and the box-level localization samplers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "alloy1d/detail/parallel.hpp"
#include "alloy1d/detail/stats.hpp"
#include "alloy1d/floquet.hpp"
#include "alloy1d/lyapunov.hpp"
#include "alloy1d/solution.hpp"

namespace alloy1d {

inline constexpr double kPi = 3.14159265358979323846;

// ---------------------------------------------------------------------------
// Boxes

/// First and last cell index meeting (-L/2, L/2). Cells are [n - 1/2, n + 1/2].
inline std::pair<std::int64_t, std::int64_t> box_cell_range(std::int64_t L) {
  if (L < 1) throw InvalidInput("box length L must be a positive integer");
  const std::int64_t first = -(L / 2);
  return {first, -first};
}

/// Potential of the box restricted to [-L/2, L/2]; for even L the two end
/// cells are halved.
inline PiecewisePotential box_potential(const ModelConfig& model, const Configuration& config, std::int64_t L) {
  const auto [first, last] = box_cell_range(L);
  if (!config.covers(first, last)) {
    std::ostringstream msg;
    msg << "configuration covers cells " << config.first_index() << ".." << config.last_index() << ", box needs "
        << first << ".." << last;
    throw InvalidInput(msg.str());
  }
  std::map<double, PiecewisePotential> cache;
  const double lo = -0.5 * static_cast<double>(L), hi = 0.5 * static_cast<double>(L);
  PiecewisePotential box;
  box.x_start = lo;
  for (std::int64_t n = first; n <= last; ++n) {
    const double q = config.at(n);
    auto it = cache.find(q);
    if (it == cache.end()) it = cache.emplace(q, cell_potential(model, q)).first;
    double left = static_cast<double>(n) - 0.5;
    for (std::size_t i = 0; i < it->second.size(); ++i) {
      const double right = left + it->second.widths[i];
      const double a = std::max(left, lo), b = std::min(right, hi);
      if (b - a > kBreakpointTolerance) {
        box.widths.push_back(b - a);
        box.values.push_back(it->second.values[i]);
      }
      left = right;
    }
  }
  return box;
}

inline Configuration box_configuration(const ModelConfig& model, std::int64_t L, std::uint64_t master_seed,
                                       std::uint64_t sample_index) {
  const auto [first, last] = box_cell_range(L);
  return sample_configuration(model, first, last, master_seed, sample_index);
}

// ---------------------------------------------------------------------------
// Eigenvalue counting

namespace detail {

/// Pruefer angle theta = n pi + r with r in [0, pi), tracked separately so
/// that long boxes lose no precision.
struct PrueferPhase {
  std::int64_t n = 0;
  double r = 0.0;
};

/// Advances the phase across a constant piece. Pieces with k w >= 1 in the
/// oscillatory regime use the modified angle psi (tan psi = k tan theta),
/// which advances by exactly k w; every other piece holds at most one zero
/// of u, so the new sheet follows from the sign of the propagated u.
inline void advance_phase(PrueferPhase& ph, double w, double v, double lambda) {
  const double s = v - lambda;
  if (s < 0.0) {
    const double k = std::sqrt(-s);
    if (k * w >= 1.0) {
      const double psi = std::atan2(k * std::sin(ph.r), std::cos(ph.r)) + k * w;
      const double m = std::floor(psi / kPi);
      const double t = psi - m * kPi;
      ph.n += static_cast<std::int64_t>(m);
      ph.r = std::atan2(std::sin(t), k * std::cos(t));
      if (ph.r < 0.0) ph.r = 0.0;
      if (ph.r >= kPi) {
        ph.r -= kPi;
        ++ph.n;
      }
      return;
    }
  }
  const double sr = std::sin(ph.r), cr = std::cos(ph.r);
  double u, du;
  const double kw2 = std::abs(s) * w * w;
  if (s > 0.0 && kw2 >= kSeriesSwitch * kSeriesSwitch) {
    // (u, u') / cosh(kw): bounded for any width.
    const double k = std::sqrt(s);
    const double th = std::tanh(k * w);
    u = sr + th / k * cr;
    du = k * th * sr + cr;
  } else {
    const PieceEntries<double> e = piece_entries<double>(w, s);
    u = e.ch * sr + e.shk * cr;
    du = e.ksh * sr + e.ch * cr;
  }
  if (u > 0.0) {
    ph.r = std::atan2(u, du);
  } else if (u < 0.0) {
    ++ph.n;
    ph.r = std::atan2(-u, -du);
  } else if (du > 0.0) {
    ph.r = 0.0;
  } else {
    ++ph.n;
    ph.r = 0.0;
  }
}

}  // namespace detail

/// Number of Dirichlet eigenvalues <= lambda of -d^2/dx^2 + V on the support
/// of `box` (exact except when lambda is itself an eigenvalue).
inline std::int64_t eigenvalue_count(const PiecewisePotential& box, double lambda) {
  detail::PrueferPhase ph;
  for (std::size_t i = 0; i < box.size(); ++i) detail::advance_phase(ph, box.widths[i], box.values[i], lambda);
  return ph.n;
}

inline std::int64_t eigenvalue_count(const ModelConfig& model, const Configuration& config, std::int64_t L,
                                     double lambda) {
  return eigenvalue_count(box_potential(model, config, L), lambda);
}

/// Eigenvalues in (lo, hi], each refined by bisection on the count to width tol.
inline std::vector<double> box_eigenvalues(const PiecewisePotential& box, double lo, double hi, double tol = 1e-12) {
  if (!(lo < hi)) throw InvalidInput("box_eigenvalues: window must satisfy lo < hi");
  if (!(tol > 0.0)) throw InvalidInput("box_eigenvalues: tol must be positive");
  std::vector<double> out;
  struct Segment {
    double a, b;
    std::int64_t ca, cb;
  };
  std::vector<Segment> stack{{lo, hi, eigenvalue_count(box, lo), eigenvalue_count(box, hi)}};
  while (!stack.empty()) {
    const Segment s = stack.back();
    stack.pop_back();
    if (s.cb == s.ca) continue;
    const double m = 0.5 * (s.a + s.b);
    if (s.b - s.a <= tol || m <= s.a || m >= s.b) {
      for (std::int64_t j = s.ca; j < s.cb; ++j) out.push_back(m);
      continue;
    }
    const std::int64_t cm = eigenvalue_count(box, m);
    // Upper half first so that the lower half is processed next.
    stack.push_back({m, s.b, cm, s.cb});
    stack.push_back({s.a, m, s.ca, cm});
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<double> box_eigenvalues(const ModelConfig& model, const Configuration& config, std::int64_t L,
                                           double lo, double hi, double tol = 1e-12) {
  return box_eigenvalues(box_potential(model, config, L), lo, hi, tol);
}

// ---------------------------------------------------------------------------
// Integrated density of states

struct IDSTable {
  std::vector<double> lambda_grid;
  std::vector<double> values;
  std::vector<double> std_errors;
  std::int64_t L = 0;
  std::int64_t n_samples = 0;
};

/// Mean of count/L over sample configurations 0..n_samples-1 of `master_seed`;
/// every grid energy sees the same configurations.
inline IDSTable ids_estimate(const ModelConfig& model, const std::vector<double>& grid, std::int64_t L,
                             std::int64_t n_samples, std::uint64_t master_seed, unsigned workers = 1) {
  if (n_samples < 1) throw InvalidInput("ids_estimate: n_samples must be >= 1");
  const auto ns = static_cast<std::size_t>(n_samples);
  std::vector<std::vector<double>> per_sample(ns);
  detail::parallel_for(ns, workers, [&](std::size_t s) {
    const PiecewisePotential box = box_potential(model, box_configuration(model, L, master_seed, s), L);
    per_sample[s].resize(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g)
      per_sample[s][g] = static_cast<double>(eigenvalue_count(box, grid[g])) / static_cast<double>(L);
  });
  IDSTable t;
  t.lambda_grid = grid;
  t.L = L;
  t.n_samples = n_samples;
  std::vector<double> column(ns);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    for (std::size_t s = 0; s < ns; ++s) column[s] = per_sample[s][g];
    const detail::MeanAndError me = detail::mean_and_error(column);
    t.values.push_back(me.mean);
    t.std_errors.push_back(me.std_error);
  }
  return t;
}

// ---------------------------------------------------------------------------
// Thouless identity

namespace detail {

/// Antiderivative of log|t - l|.
inline double log_abs_primitive(double t, double l) {
  const double d = t - l;
  return d == 0.0 ? 0.0 : d * std::log(std::abs(d)) - d;
}

/// Antiderivative of log|t - i| = log(1 + t^2) / 2.
inline double log_modulus_i_primitive(double t) {
  return 0.5 * (t * std::log1p(t * t) - 2.0 * t + 2.0 * std::atan(t));
}

}  // namespace detail

struct ThoulessRow {
  double lambda = 0.0;
  double gamma = 0.0;
  double integral = 0.0;
  double residual = 0.0;
};

struct ThoulessResult {
  double alpha = 0.0;
  double max_residual = 0.0;
  std::vector<ThoulessRow> rows;
  /// Spread over the fit energies of the leading missing-tail term
  /// lambda / (pi sqrt(T)), relative to the largest |gamma| in the fit.
  double tail_fraction = 0.0;
  bool tail_warning = false;
};

struct ThoulessOptions {
  /// Adds the asymptotic N ~ sqrt(t)/pi contribution above the grid top.
  bool tail_correction = true;
  /// Warn when the tail estimate exceeds this fraction of max |gamma|.
  double tail_warning_fraction = 0.1;
};

/// int log|(l - t)/(t - i)| dN(t) for piecewise-linear N on the table grid
/// with a point mass N(t_0) at the first node.
inline double thouless_integral(const IDSTable& ids, double lambda, bool tail_correction = true) {
  const std::vector<double>& t = ids.lambda_grid;
  const std::vector<double>& N = ids.values;
  double total = 0.0;
  if (N.front() != 0.0)
    total += N.front() * (std::log(std::abs(lambda - t.front())) - 0.5 * std::log1p(t.front() * t.front()));
  for (std::size_t j = 0; j + 1 < t.size(); ++j) {
    const double dN = N[j + 1] - N[j];
    if (dN == 0.0) continue;
    const double density = dN / (t[j + 1] - t[j]);
    const double a = detail::log_abs_primitive(t[j + 1], lambda) - detail::log_abs_primitive(t[j], lambda);
    const double b = detail::log_modulus_i_primitive(t[j + 1]) - detail::log_modulus_i_primitive(t[j]);
    total += density * (a - b);
  }
  if (tail_correction) {
    // log|1 - l/t| - log(1 + 1/t^2)/2 against dN = dt / (2 pi sqrt t), two terms.
    const double T = t.back();
    if (T > std::abs(lambda)) total += -lambda / (kPi * std::sqrt(T)) - (lambda * lambda + 1.0) / (6.0 * kPi * T * std::sqrt(T));
  }
  return total;
}

/// Fits gamma(l) = -alpha + int log|(l - t)/(t - i)| dN(t) over the table
/// energies inside `fit_window` (a union of intervals).
inline ThoulessResult thouless_check(const std::vector<LyapunovEstimate>& gamma_table, const IDSTable& ids,
                                     const std::vector<Interval>& fit_window, const ThoulessOptions& opt = {}) {
  if (fit_window.empty()) throw InvalidInput("thouless_check: fit_window is empty");
  if (ids.lambda_grid.size() < 2 || ids.values.size() != ids.lambda_grid.size())
    throw InvalidInput("thouless_check: IDS table needs at least two grid points");
  double top = -INFINITY;
  for (const Interval& iv : fit_window) {
    if (!(iv.left <= iv.right)) throw InvalidInput("thouless_check: fit_window interval with left > right");
    top = std::max(top, iv.right);
  }
  if (top > ids.lambda_grid.back()) {
    std::ostringstream msg;
    msg << "IDS grid ends at " << ids.lambda_grid.back() << ", below the fit window top " << top;
    throw InsufficientRange(msg.str());
  }
  ThoulessResult res;
  for (const LyapunovEstimate& e : gamma_table) {
    const bool inside = std::any_of(fit_window.begin(), fit_window.end(),
                                    [&](const Interval& iv) { return iv.contains(e.lambda); });
    if (inside) res.rows.push_back({e.lambda, e.mean, thouless_integral(ids, e.lambda, opt.tail_correction), 0.0});
  }
  if (res.rows.empty()) throw InvalidInput("thouless_check: no Lyapunov energies inside fit_window");
  std::vector<double> diffs;
  for (const ThoulessRow& r : res.rows) diffs.push_back(r.integral - r.gamma);
  res.alpha = detail::pairwise_sum(diffs) / static_cast<double>(diffs.size());
  double max_gamma = 0.0, lo_tail = INFINITY, hi_tail = -INFINITY;
  const double T = ids.lambda_grid.back();
  for (ThoulessRow& r : res.rows) {
    r.residual = r.gamma - (r.integral - res.alpha);
    res.max_residual = std::max(res.max_residual, std::abs(r.residual));
    max_gamma = std::max(max_gamma, std::abs(r.gamma));
    const double tail = r.lambda / (kPi * std::sqrt(T));
    lo_tail = std::min(lo_tail, tail);
    hi_tail = std::max(hi_tail, tail);
  }
  // A constant tail is absorbed into alpha; only its spread over the rows biases the fit.
  res.tail_fraction = max_gamma > 0.0 ? (hi_tail - lo_tail) / max_gamma : INFINITY;
  res.tail_warning = !opt.tail_correction && res.tail_fraction > opt.tail_warning_fraction;
  return res;
}

// ---------------------------------------------------------------------------
// Green's function

struct GreenOptions {
  /// EigenvalueProximity when the first-order distance estimate
  /// |u(L/2) u'(L/2)| / int u^2 to the nearest eigenvalue is below this.
  double proximity_tol = 1e-10;
};

/// Dirichlet solutions of a box at a fixed energy: u_- from the left end,
/// u_+ from the right, both with unit slope at their zero.
class BoxSolutions {
public:
  BoxSolutions(PiecewisePotential box, double lambda, const GreenOptions& opt = {})
      : box_(std::move(box)), lambda_(lambda) {
    const ScaledState end = propagate_across(box_, lambda_, {0.0, 1.0});
    // W(u_+, u_-) at the right end, where u_+ = 0 and u_+' = 1.
    w_hat_ = -end.u;
    w_log_scale_ = end.log_scale;
    const double log_int = log_square_integral(box_, lambda_, {0.0, 1.0});
    log_distance_ = std::log(std::abs(end.u * end.du)) + 2.0 * end.log_scale - log_int;
    if (!(log_distance_ > std::log(opt.proximity_tol))) {
      std::ostringstream msg;
      msg << "lambda = " << lambda << " is within about " << std::exp(log_distance_)
          << " of a Dirichlet eigenvalue of the box";
      throw EigenvalueProximity(msg.str());
    }
  }

  double lambda() const noexcept { return lambda_; }
  const PiecewisePotential& box() const noexcept { return box_; }
  /// First-order estimate of the distance to the nearest box eigenvalue.
  double eigenvalue_distance() const { return std::exp(log_distance_); }

  /// G(x_i, y_j) for ascending xs and ys.
  std::vector<std::vector<double>> kernel(const std::vector<double>& xs, const std::vector<double>& ys) const {
    std::vector<double> pts = xs;
    pts.insert(pts.end(), ys.begin(), ys.end());
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    const std::vector<ScaledState> minus = shoot_right(box_, lambda_, {0.0, 1.0}, pts);
    const std::vector<ScaledState> plus = shoot_left(box_, lambda_, {0.0, 1.0}, pts);
    auto index = [&pts](double x) {
      return static_cast<std::size_t>(std::lower_bound(pts.begin(), pts.end(), x) - pts.begin());
    };
    std::vector<std::vector<double>> g(xs.size(), std::vector<double>(ys.size()));
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const std::size_t ix = index(xs[i]);
      for (std::size_t j = 0; j < ys.size(); ++j) {
        const std::size_t iy = index(ys[j]);
        const std::size_t hi = xs[i] >= ys[j] ? ix : iy;
        const std::size_t lo = xs[i] >= ys[j] ? iy : ix;
        g[i][j] = combine(plus[hi], minus[lo]);
      }
    }
    return g;
  }

  double operator()(double x, double y) const { return kernel({x}, {y})[0][0]; }

private:
  double combine(const ScaledState& p, const ScaledState& m) const {
    const double num = p.u * m.u;
    if (num == 0.0) return 0.0;
    const double log_mag = std::log(std::abs(num)) - std::log(std::abs(w_hat_)) + p.log_scale + m.log_scale -
                           w_log_scale_;
    const double sign = (num > 0.0) == (w_hat_ > 0.0) ? 1.0 : -1.0;
    return sign * std::exp(log_mag);
  }

  PiecewisePotential box_;
  double lambda_;
  double w_hat_ = 0.0;
  double w_log_scale_ = 0.0;
  double log_distance_ = 0.0;
};

/// Kernel of (H_box - lambda)^{-1} at (x, y).
inline double green_function(const ModelConfig& model, const Configuration& config, std::int64_t L, double lambda,
                             double x, double y, const GreenOptions& opt = {}) {
  const double half = 0.5 * static_cast<double>(L);
  if (std::abs(x) > half || std::abs(y) > half) throw InvalidInput("green_function: x and y must lie in the box");
  return BoxSolutions(box_potential(model, config, L), lambda, opt)(x, y);
}

// ---------------------------------------------------------------------------
// Good boxes

inline constexpr double kGoodBoxSpacing = 0.05;

/// Midpoints of a uniform partition of [a, b] with spacing at most h.
inline std::vector<double> midpoint_grid(double a, double b, double h) {
  const auto n = static_cast<std::size_t>(std::ceil((b - a) / h - 1e-9));
  std::vector<double> xs(n);
  for (std::size_t i = 0; i < n; ++i) xs[i] = a + (b - a) * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
  return xs;
}

struct CollarNorms {
  double hilbert_schmidt = 0.0;
  double schur = 0.0;
  double bound() const { return std::min(hilbert_schmidt, schur); }
};

/// Quadrature estimates of |chi_out R chi_int| for the box: the
/// Hilbert-Schmidt norm and the Schur-test bound.
inline CollarNorms collar_norms(const BoxSolutions& sol, std::int64_t L, double h = kGoodBoxSpacing) {
  const double half = 0.5 * static_cast<double>(L);
  std::vector<double> xs = midpoint_grid(-half, -half + 1.0, h);
  const std::vector<double> right = midpoint_grid(half - 1.0, half, h);
  xs.insert(xs.end(), right.begin(), right.end());
  const std::vector<double> ys = midpoint_grid(-half / 3.0, half / 3.0, h);
  const double hx = 1.0 / static_cast<double>(right.size());
  const double hy = (2.0 * half / 3.0) / static_cast<double>(ys.size());
  const auto g = sol.kernel(xs, ys);
  double hs = 0.0, row_max = 0.0;
  std::vector<double> col(ys.size(), 0.0);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < ys.size(); ++j) {
      const double a = std::abs(g[i][j]);
      hs += a * a * hx * hy;
      row += a * hy;
      col[j] += a * hx;
    }
    row_max = std::max(row_max, row);
  }
  const double col_max = *std::max_element(col.begin(), col.end());
  return {std::sqrt(hs), std::sqrt(row_max * col_max)};
}

struct GoodBoxResult {
  double fraction = 0.0;
  std::int64_t n_good = 0;
  std::int64_t n_proximal = 0;
  std::int64_t n_samples = 0;
};

inline void require_good_box_length(std::int64_t L) {
  if (L < 3 || L % 3 != 0 || L % 6 == 0) {
    std::ostringstream msg;
    msg << "L = " << L << " must be an odd multiple of 3";
    throw InvalidInput(msg.str());
  }
}

/// Fraction of sample boxes that are (gamma_bar, lambda)-good: lambda not
/// eigenvalue-proximal and min(HS, Schur) <= exp(-gamma_bar L / 3).
inline GoodBoxResult good_box_probability(const ModelConfig& model, double lambda, double gamma_bar, std::int64_t L,
                                          std::int64_t n_samples, std::uint64_t master_seed, unsigned workers = 1,
                                          const GreenOptions& opt = {}) {
  require_good_box_length(L);
  if (!(gamma_bar > 0.0)) throw InvalidInput("good_box_probability: gamma_bar must be positive");
  if (n_samples < 1) throw InvalidInput("good_box_probability: n_samples must be >= 1");
  const double threshold = std::exp(-gamma_bar * static_cast<double>(L) / 3.0);
  std::vector<int> status(static_cast<std::size_t>(n_samples));  // 1 good, 0 bad, -1 proximal
  detail::parallel_for(status.size(), workers, [&](std::size_t s) {
    try {
      const BoxSolutions sol(box_potential(model, box_configuration(model, L, master_seed, s), L), lambda, opt);
      status[s] = collar_norms(sol, L).bound() <= threshold ? 1 : 0;
    } catch (const EigenvalueProximity&) {
      status[s] = -1;
    }
  });
  GoodBoxResult r;
  r.n_samples = n_samples;
  for (int st : status) {
    r.n_good += st == 1;
    r.n_proximal += st == -1;
  }
  r.fraction = static_cast<double>(r.n_good) / static_cast<double>(n_samples);
  return r;
}

/// Energy window around lambda on which goodness at rate gamma - eps carries
/// over to rate gamma - eps_prime (0 < eps < eps_prime).
inline double kappa_L(double gamma, double eps, double eps_prime, double sigma, double beta, std::int64_t L) {
  if (!(0.0 < eps && eps < eps_prime)) throw InvalidInput("kappa_L: need 0 < eps < eps_prime");
  const double l = static_cast<double>(L);
  return 0.5 * std::exp(-2.0 * sigma * std::pow(l, beta)) *
         (std::exp(-(gamma - eps_prime) * l / 3.0) - std::exp(-(gamma - eps) * l / 3.0));
}

// ---------------------------------------------------------------------------
// Wegner

struct WegnerResult {
  double fraction = 0.0;
  double epsilon = 0.0;
  std::int64_t n_hits = 0;
  std::int64_t n_samples = 0;
};

/// Fraction of sample boxes with an eigenvalue within exp(-sigma L^beta) of lambda.
inline WegnerResult wegner_probability(const ModelConfig& model, double lambda, std::int64_t L, double sigma,
                                       double beta, std::int64_t n_samples, std::uint64_t master_seed,
                                       unsigned workers = 1) {
  if (!(beta > 0.0 && beta < 1.0)) throw InvalidInput("wegner_probability: beta must lie in (0, 1)");
  if (!(sigma > 0.0)) throw InvalidInput("wegner_probability: sigma must be positive");
  if (n_samples < 1) throw InvalidInput("wegner_probability: n_samples must be >= 1");
  const double eps = std::exp(-sigma * std::pow(static_cast<double>(L), beta));
  std::vector<double> hit(static_cast<std::size_t>(n_samples));
  detail::parallel_for(hit.size(), workers, [&](std::size_t s) {
    const PiecewisePotential box = box_potential(model, box_configuration(model, L, master_seed, s), L);
    const std::vector<double> ev = box_eigenvalues(box, lambda - 2.0 * eps, lambda + 2.0 * eps, eps * 1e-6);
    hit[s] = std::any_of(ev.begin(), ev.end(), [&](double e) { return std::abs(e - lambda) <= eps; }) ? 1.0 : 0.0;
  });
  WegnerResult r;
  r.epsilon = eps;
  r.n_samples = n_samples;
  r.n_hits = static_cast<std::int64_t>(detail::pairwise_sum(hit));
  r.fraction = static_cast<double>(r.n_hits) / static_cast<double>(n_samples);
  return r;
}

// ---------------------------------------------------------------------------
// Eigenfunction decay

struct DecayFit {
  double decay_rate = 0.0;
  /// Integer point used as the localization centre.
  double center = 0.0;
  /// log sqrt(u^2 + u'^2) at the integer points, maximum shifted to zero.
  std::vector<double> points;
  std::vector<double> envelope;
};

/// Rebuilds the eigenfunction from both ends, matched at the integer point
/// maximizing the combined envelope, and fits the decay of its envelope
/// against the distance from that point (both tails pooled, points within
/// `exclude` of the centre or of the box ends left out).
inline DecayFit eigenfunction_decay(const PiecewisePotential& box, double eigenvalue, double mismatch_tol = 1e-6,
                                    double exclude = 1.0) {
  const double lo = box.x_start, hi = box.x_end();
  std::vector<double> pts;
  for (double x = std::ceil(lo); x <= hi; x += 1.0) pts.push_back(x);
  if (pts.size() < 3) throw InvalidInput("eigenfunction_decay: box too short");
  const std::vector<ScaledState> minus = shoot_right(box, eigenvalue, {0.0, 1.0}, pts);
  const std::vector<ScaledState> plus = shoot_left(box, eigenvalue, {0.0, 1.0}, pts);
  std::size_t c = 0;
  double best = -INFINITY;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double s = minus[i].log_norm() + plus[i].log_norm();
    if (s > best) {
      best = s;
      c = i;
    }
  }
  const ScaledState& m = minus[c];
  const ScaledState& p = plus[c];
  const double rel_w = std::abs(m.u * p.du - m.du * p.u) / (m.norm_hat() * p.norm_hat());
  if (!(rel_w <= mismatch_tol)) {
    std::ostringstream msg;
    msg << "shooting mismatch " << rel_w << " at x = " << pts[c] << ": " << eigenvalue << " is not an eigenvalue";
    throw EigenvalueProximity(msg.str());
  }
  DecayFit fit;
  fit.center = pts[c];
  const double shift = p.log_norm() - m.log_norm();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    fit.points.push_back(pts[i]);
    fit.envelope.push_back(i <= c ? minus[i].log_norm() : plus[i].log_norm() - shift);
  }
  const double top = *std::max_element(fit.envelope.begin(), fit.envelope.end());
  for (double& e : fit.envelope) e -= top;
  std::vector<double> d, e;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double dist = std::abs(pts[i] - fit.center);
    if (dist >= exclude && pts[i] - lo >= exclude && hi - pts[i] >= exclude) {
      d.push_back(dist);
      e.push_back(fit.envelope[i]);
    }
  }
  if (d.size() < 2) throw InvalidInput("eigenfunction_decay: too few points away from the centre");
  const double n = static_cast<double>(d.size());
  const double md = detail::pairwise_sum(d) / n, me = detail::pairwise_sum(e) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    sxy += (d[i] - md) * (e[i] - me);
    sxx += (d[i] - md) * (d[i] - md);
  }
  fit.decay_rate = sxx > 0.0 ? -sxy / sxx : 0.0;
  return fit;
}

inline DecayFit eigenfunction_decay(const ModelConfig& model, const Configuration& config, std::int64_t L,
                                    double eigenvalue) {
  return eigenfunction_decay(box_potential(model, config, L), eigenvalue);
}

}  // namespace alloy1d
