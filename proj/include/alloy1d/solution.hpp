#pragma once

/// Real solutions of -u'' + V u = lambda u on a step potential, evaluated at
/// arbitrary points. States carry a separate log-scale so that boxes with
/// strong exponential growth never overflow.

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "alloy1d/transfer.hpp"

namespace alloy1d {

/// (u, u') = exp(log_scale) * (u_hat, du_hat).
struct ScaledState {
  double u = 0.0;
  double du = 1.0;
  double log_scale = 0.0;

  double norm_hat() const { return std::hypot(u, du); }
  /// log of sqrt(u^2 + u'^2).
  double log_norm() const { return log_scale + std::log(norm_hat()); }
  double value() const { return u * std::exp(log_scale); }
  double derivative() const { return du * std::exp(log_scale); }

  void rescale() {
    const double n = norm_hat();
    if (n > 1e64 || (n < 1e-64 && n > 0.0)) {
      u /= n;
      du /= n;
      log_scale += std::log(n);
    }
  }
};

namespace detail {

inline ScaledState apply(const TransferMatrix& m, const ScaledState& s) {
  ScaledState out{m.a * s.u + m.b * s.du, m.c * s.u + m.d * s.du, s.log_scale};
  out.rescale();
  return out;
}

}  // namespace detail

/// States at ascending `points` of the solution with data `initial` at the
/// left end of the potential's support.
inline std::vector<ScaledState> shoot_right(const PiecewisePotential& p, double lambda, Vec2<double> initial,
                                            std::span<const double> points) {
  std::vector<ScaledState> out;
  out.reserve(points.size());
  ScaledState state{initial.x, initial.y, 0.0};
  state.rescale();
  double left = p.x_start;
  std::size_t k = 0;
  for (std::size_t i = 0; i < p.size() && k < points.size(); ++i) {
    const double right = left + p.widths[i];
    const bool last = i + 1 == p.size();
    while (k < points.size() && (points[k] <= right || last)) {
      const double t = std::clamp(points[k] - left, 0.0, p.widths[i]);
      out.push_back(detail::apply(piece_propagator<double>(t, p.values[i], lambda), state));
      ++k;
    }
    state = detail::apply(piece_propagator<double>(p.widths[i], p.values[i], lambda), state);
    left = right;
  }
  return out;
}

/// States at ascending `points` of the solution with data `initial` at the
/// right end of the potential's support.
inline std::vector<ScaledState> shoot_left(const PiecewisePotential& p, double lambda, Vec2<double> initial,
                                           std::span<const double> points) {
  std::vector<ScaledState> out(points.size());
  ScaledState state{initial.x, initial.y, 0.0};
  state.rescale();
  double right = p.x_end();
  std::size_t k = points.size();
  for (std::size_t i = p.size(); i-- > 0 && k > 0;) {
    const double left = right - p.widths[i];
    const bool first = i == 0;
    while (k > 0 && (points[k - 1] >= left || first)) {
      const double t = std::clamp(right - points[k - 1], 0.0, p.widths[i]);
      out[k - 1] = detail::apply(piece_propagator<double>(t, p.values[i], lambda).sl_inverse(), state);
      --k;
    }
    state = detail::apply(piece_propagator<double>(p.widths[i], p.values[i], lambda).sl_inverse(), state);
    right = left;
  }
  return out;
}

/// State at the right end of the support for data `initial` at the left end.
inline ScaledState propagate_across(const PiecewisePotential& p, double lambda, Vec2<double> initial) {
  ScaledState state{initial.x, initial.y, 0.0};
  state.rescale();
  for (std::size_t i = 0; i < p.size(); ++i)
    state = detail::apply(piece_propagator<double>(p.widths[i], p.values[i], lambda), state);
  return state;
}

/// log of int |u|^2 over the support for data `initial` at the left end,
/// by Gauss-Legendre on sub-intervals short against the local wavelength.
inline double log_square_integral(const PiecewisePotential& p, double lambda, Vec2<double> initial) {
  static constexpr std::array<double, 5> nodes{-0.9061798459386640, -0.5384693101056831, 0.0,
                                               0.5384693101056831, 0.9061798459386640};
  static constexpr std::array<double, 5> weights{0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                                 0.4786286704993665, 0.2369268850561891};
  ScaledState state{initial.x, initial.y, 0.0};
  state.rescale();
  double log_total = -INFINITY;
  auto accumulate = [&log_total](double log_term) {
    if (log_term == -INFINITY) return;
    const double hi = std::max(log_total, log_term);
    log_total = hi + std::log(std::exp(log_total - hi) + std::exp(log_term - hi));
  };
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double w = p.widths[i];
    const double v = p.values[i];
    const int n_sub = 1 + static_cast<int>(std::ceil(std::sqrt(std::abs(v - lambda)) * w));
    const double h = w / n_sub;
    for (int j = 0; j < n_sub; ++j) {
      double sum = 0.0;
      for (std::size_t g = 0; g < nodes.size(); ++g) {
        const double t = 0.5 * h * (nodes[g] + 1.0);
        const TransferMatrix m = piece_propagator<double>(t, v, lambda);
        const double u = m.a * state.u + m.b * state.du;
        sum += weights[g] * u * u;
      }
      if (sum > 0.0) accumulate(std::log(0.5 * h * sum) + 2.0 * state.log_scale);
      state = detail::apply(piece_propagator<double>(h, v, lambda), state);
    }
  }
  return log_total;
}

}  // namespace alloy1d
