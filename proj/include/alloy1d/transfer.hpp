#pragma once

/// Exact propagation of (u, u') for -u'' + V u = z u across step potentials.

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <type_traits>
#include <vector>

#include "alloy1d/model.hpp"

namespace alloy1d {

using cplx = std::complex<double>;

template <class T>
struct Vec2 {
  T x{}, y{};

  friend Vec2 operator+(const Vec2& a, const Vec2& b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(const Vec2& a, const Vec2& b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(T s, const Vec2& a) { return {s * a.x, s * a.y}; }
};

/// Row-major 2x2 matrix [[a, b], [c, d]].
template <class T>
struct Mat2 {
  T a{1}, b{0}, c{0}, d{1};

  static constexpr Mat2 identity() { return {T(1), T(0), T(0), T(1)}; }

  T det() const { return a * d - b * c; }
  T trace() const { return a + d; }

  /// Inverse assuming unit determinant.
  Mat2 sl_inverse() const { return {d, -b, -c, a}; }

  Mat2 inverse() const {
    const T D = det();
    return {d / D, -b / D, -c / D, a / D};
  }

  Vec2<T> column(int j) const { return j == 0 ? Vec2<T>{a, c} : Vec2<T>{b, d}; }

  friend Mat2 operator*(const Mat2& m, const Mat2& n) {
    return {m.a * n.a + m.b * n.c, m.a * n.b + m.b * n.d, m.c * n.a + m.d * n.c, m.c * n.b + m.d * n.d};
  }
  friend Vec2<T> operator*(const Mat2& m, const Vec2<T>& v) {
    return {m.a * v.x + m.b * v.y, m.c * v.x + m.d * v.y};
  }
  friend Mat2 operator-(const Mat2& m, const Mat2& n) { return {m.a - n.a, m.b - n.b, m.c - n.c, m.d - n.d}; }
  friend Mat2 operator*(T s, const Mat2& m) { return {s * m.a, s * m.b, s * m.c, s * m.d}; }
};

using TransferMatrix = Mat2<double>;
using ComplexTransferMatrix = Mat2<cplx>;

template <class T>
double max_abs_entry(const Mat2<T>& m) {
  return std::max({std::abs(m.a), std::abs(m.b), std::abs(m.c), std::abs(m.d)});
}

/// Spectral norm of a real 2x2 matrix.
inline double operator_norm(const TransferMatrix& m) {
  const double f2 = m.a * m.a + m.b * m.b + m.c * m.c + m.d * m.d;
  const double dt = m.det();
  const double disc = std::sqrt(std::max(0.0, f2 * f2 - 4.0 * dt * dt));
  return std::sqrt(0.5 * (f2 + disc));
}

inline double norm(const Vec2<double>& v) { return std::hypot(v.x, v.y); }

inline TransferMatrix real_part(const ComplexTransferMatrix& m) {
  return {m.a.real(), m.b.real(), m.c.real(), m.d.real()};
}

// ---------------------------------------------------------------------------
// Constant-piece propagator

/// Entries of the propagator across width w for -u'' + (s) u = 0 with
/// s = V - z: cosh(kw), sinh(kw)/k and k sinh(kw) where k^2 = s. All three are
/// entire in s; near s = 0 they come from their Taylor series.
template <class T>
struct PieceEntries {
  T ch;   // cosh(kw)
  T shk;  // sinh(kw)/k
  T ksh;  // k sinh(kw) = s * shk
};

inline constexpr double kSeriesSwitch = 1e-4;

template <class T>
PieceEntries<T> piece_entries(double w, T s) {
  using std::abs;
  const double kw2 = abs(s) * w * w;
  if (kw2 < kSeriesSwitch * kSeriesSwitch) {
    const T x = s * (w * w);
    const T ch = T(1) + x / 2.0 + x * x / 24.0 + x * x * x / 720.0;
    const T shk = w * (T(1) + x / 6.0 + x * x / 120.0 + x * x * x / 5040.0);
    return {ch, shk, s * shk};
  }
  if constexpr (std::is_same_v<T, double>) {
    if (s > 0.0) {
      const double k = std::sqrt(s);
      const double sh = std::sinh(k * w);
      return {std::cosh(k * w), sh / k, k * sh};
    }
    const double k = std::sqrt(-s);
    const double sn = std::sin(k * w);
    return {std::cos(k * w), sn / k, -k * sn};
  } else {
    const T k = std::sqrt(s);
    const T sh = std::sinh(k * w);
    return {std::cosh(k * w), sh / k, k * sh};
  }
}

/// Propagator across a piece of width w and value v at spectral parameter z.
/// Columns are the solutions with data (1, 0) and (0, 1) at the left end.
template <class T>
Mat2<T> piece_propagator(double w, double v, T z) {
  const PieceEntries<T> e = piece_entries<T>(w, T(v) - z);
  return {e.ch, e.shk, e.ksh, e.ch};
}

/// Transfer matrix across the whole support of `potential`.
template <class T>
Mat2<T> cell_transfer(const PiecewisePotential& potential, T z) {
  Mat2<T> m = Mat2<T>::identity();
  for (std::size_t i = 0; i < potential.size(); ++i)
    m = piece_propagator<T>(potential.widths[i], potential.values[i], z) * m;
  return m;
}

inline ComplexTransferMatrix cell_transfer(const PiecewisePotential& potential, cplx z) {
  return cell_transfer<cplx>(potential, z);
}
inline TransferMatrix cell_transfer(const PiecewisePotential& potential, double lambda) {
  return cell_transfer<double>(potential, lambda);
}

/// Real cell matrices g_q(lambda), one per atom of the coupling distribution.
class CellMatrices {
public:
  CellMatrices(const ModelConfig& model, double lambda) : model_(&model), lambda_(lambda) {
    for (const Atom& a : model.mu.atoms) {
      values_.push_back(a.value);
      mats_.push_back(cell_transfer(cell_potential(model, a.value), lambda));
    }
  }

  double lambda() const noexcept { return lambda_; }

  TransferMatrix operator()(double q) const {
    for (std::size_t i = 0; i < values_.size(); ++i)
      if (values_[i] == q) return mats_[i];
    return cell_transfer(cell_potential(*model_, q), lambda_);
  }

  const std::vector<double>& values() const noexcept { return values_; }
  const std::vector<TransferMatrix>& matrices() const noexcept { return mats_; }

private:
  const ModelConfig* model_;
  double lambda_;
  std::vector<double> values_;
  std::vector<TransferMatrix> mats_;
};

// ---------------------------------------------------------------------------
// Random products

struct ProductResult {
  double log_norm = 0.0;
  Vec2<double> direction{0.0, 1.0};
  /// Cell matrix applied in the final step (identity for an empty product).
  TransferMatrix renorm_matrix = TransferMatrix::identity();
};

/// U(n) x0 = g(n) ... g(1) x0 with renormalisation after every cell, using
/// couplings q_1..q_n of `config`.
inline ProductResult random_product(const CellMatrices& cells, const Configuration& config, std::int64_t n_steps,
                                    Vec2<double> initial = {0.0, 1.0}) {
  if (n_steps > 0 && !config.covers(1, n_steps))
    throw InvalidInput("random_product: configuration does not cover cells 1..n_steps");
  ProductResult r;
  const double n0 = norm(initial);
  r.direction = (1.0 / n0) * initial;
  for (std::int64_t n = 1; n <= n_steps; ++n) {
    r.renorm_matrix = cells(config.at(n));
    const Vec2<double> next = r.renorm_matrix * r.direction;
    const double scale = norm(next);
    r.log_norm += std::log(scale);
    r.direction = (1.0 / scale) * next;
  }
  return r;
}

inline ProductResult random_product(const ModelConfig& model, const Configuration& config, double lambda,
                                    std::int64_t n_steps, Vec2<double> initial = {0.0, 1.0}) {
  return random_product(CellMatrices(model, lambda), config, n_steps, initial);
}

// ---------------------------------------------------------------------------
// A-priori bounds

/// exp(int |V - lambda + 1|): bound on the growth of |u|^2 + |u'|^2 across the
/// potential's support, for any solution.
inline double growth_bound(const PiecewisePotential& potential, double lambda) {
  return std::exp(potential.abs_integral(1.0 - lambda));
}

/// Right-hand side of the Gronwall difference estimate for unit initial data:
/// bound on ||g_lambda - g_lambda'|| across the potential's support.
inline double lipschitz_bound(const PiecewisePotential& potential, double lambda, double lambda_prime) {
  double exponent = 0.0;
  for (std::size_t i = 0; i < potential.size(); ++i) {
    const double v = potential.values[i];
    exponent += potential.widths[i] * (std::abs(v - lambda) + std::abs(v - lambda_prime) + 2.0);
  }
  return std::exp(exponent) * potential.length() * std::abs(lambda - lambda_prime);
}

/// Constants with ||g_lambda(n)||^2 <= exp(c1 + |lambda| + c2 |q_n|).
struct NormBoundConstants {
  double c1 = 0.0;
  double c2 = 0.0;

  double bound(double lambda, double q) const { return std::exp(c1 + std::abs(lambda) + c2 * std::abs(q)); }
};

inline NormBoundConstants norm_bound_constants(const ModelConfig& model) {
  return {model.v_per.abs_integral() + 1.0, model.f.abs_integral()};
}

/// Constant C with int_{x-1}^{x+1} |u|^2 >= C (|u(x)|^2 + |u'(x)|^2) for every
/// solution, given I = int_{x-1}^{x+1} |q + 1| with q = V - lambda.
inline double l2_lower_bound_constant(double window_integral) {
  const double c1 = std::exp(-window_integral);
  const double c2 = std::exp(window_integral);
  const double c3 = std::sqrt(c1 / 2.0);
  const double c4 = std::sqrt(2.0 * c2);
  const double len = std::min(2.0, c3 / (4.0 * c4));
  return len * c3 * c3 / 16.0;
}

}  // namespace alloy1d
