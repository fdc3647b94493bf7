#pragma once

/// Monte Carlo estimates built on random transfer-matrix products: the
/// Lyapunov exponent, the projective invariant measure and its pairing with
/// the cell distribution, negative moments and matrix-element growth.

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "alloy1d/detail/parallel.hpp"
#include "alloy1d/detail/stats.hpp"
#include "alloy1d/transfer.hpp"

namespace alloy1d {

struct LyapunovEstimate {
  double lambda = 0.0;
  std::int64_t n_steps = 0;
  std::int64_t n_samples = 0;
  double mean = 0.0;
  double std_error = 0.0;
  std::uint64_t master_seed = 0;
};

struct SamplingOptions {
  /// Initial vector of every product; the limit does not depend on it.
  Vec2<double> initial{0.0, 1.0};
  /// Worker threads; results are bit-identical for any value.
  unsigned workers = 1;
  /// Cells 1..burn_in are applied but excluded from the growth rate, which
  /// then runs over cells burn_in+1..burn_in+n_steps.
  std::int64_t burn_in = 0;
};

namespace detail {

/// Streams g(n) for n = first, first + 1, ... with couplings drawn exactly as
/// sample_configuration would, calling visit(direction) after every step.
template <class Visit>
double streamed_product(const CellMatrices& cells, const CouplingDistribution& mu, std::uint64_t seed,
                        std::uint64_t sample, std::int64_t first, std::int64_t n_steps, Vec2<double>& direction,
                        Visit&& visit) {
  double log_norm = 0.0;
  for (std::int64_t n = first; n < first + n_steps; ++n) {
    const Vec2<double> next = cells(draw_coupling(mu, seed, sample, n)) * direction;
    const double s = norm(next);
    log_norm += std::log(s);
    direction = (1.0 / s) * next;
    visit(direction);
  }
  return log_norm;
}

inline double sample_log_norm(const CellMatrices& cells, const CouplingDistribution& mu, std::uint64_t seed,
                              std::uint64_t sample, std::int64_t n_steps, Vec2<double> initial,
                              std::int64_t burn_in = 0) {
  Vec2<double> dir = (1.0 / norm(initial)) * initial;
  auto ignore = [](const Vec2<double>&) {};
  streamed_product(cells, mu, seed, sample, 1, burn_in, dir, ignore);
  return streamed_product(cells, mu, seed, sample, burn_in + 1, n_steps, dir, ignore);
}

}  // namespace detail

/// One estimate per grid energy; energy i uses the stream derive_seed(seed, i)
/// and sample s the couplings of sample_configuration(model, 1, burn_in + n_steps, ., s).
inline std::vector<LyapunovEstimate> lyapunov_profile(const ModelConfig& model, const std::vector<double>& grid,
                                                      std::int64_t n_steps, std::int64_t n_samples,
                                                      std::uint64_t master_seed, const SamplingOptions& opt = {}) {
  if (n_steps < 1 || n_samples < 1) throw InvalidInput("lyapunov: n_steps and n_samples must be >= 1");
  if (opt.burn_in < 0) throw InvalidInput("lyapunov: burn_in must be >= 0");
  std::vector<LyapunovEstimate> out;
  out.reserve(grid.size());
  for (std::size_t e = 0; e < grid.size(); ++e) {
    const CellMatrices cells(model, grid[e]);
    const std::uint64_t seed = derive_seed(master_seed, e);
    std::vector<double> rates(static_cast<std::size_t>(n_samples));
    detail::parallel_for(rates.size(), opt.workers, [&](std::size_t s) {
      rates[s] = detail::sample_log_norm(cells, model.mu, seed, s, n_steps, opt.initial, opt.burn_in) /
                 static_cast<double>(n_steps);
    });
    const detail::MeanAndError me = detail::mean_and_error(rates);
    out.push_back({grid[e], n_steps, n_samples, me.mean, me.std_error, master_seed});
  }
  return out;
}

inline LyapunovEstimate estimate_lyapunov(const ModelConfig& model, double lambda, std::int64_t n_steps,
                                          std::int64_t n_samples, std::uint64_t master_seed,
                                          const SamplingOptions& opt = {}) {
  return lyapunov_profile(model, {lambda}, n_steps, n_samples, master_seed, opt).front();
}

// ---------------------------------------------------------------------------
// Invariant measure

struct DirectionHistogram {
  double lambda = 0.0;
  int bin_count = 0;
  /// Mass per bin of the projective angle in [0, pi).
  std::vector<double> weights;
  /// Total-variation distance between the histograms of the two halves of
  /// the recording window.
  double drift = 0.0;

  double bin_center(int i) const { return (i + 0.5) * 3.14159265358979323846 / bin_count; }
};

inline constexpr std::int64_t kDefaultBurnIn = 1000;

/// Projective angle of v in [0, pi).
inline double projective_angle(Vec2<double> v) {
  constexpr double pi = 3.14159265358979323846;
  double t = std::atan2(v.y, v.x);
  if (t < 0.0) t += pi;
  if (t >= pi) t -= pi;
  return t;
}

/// Histogram of the directions of a single chain (sample index 0) after
/// `burn_in` steps.
inline DirectionHistogram invariant_measure(const ModelConfig& model, double lambda, std::int64_t burn_in,
                                            std::int64_t n_record, int bin_count, std::uint64_t master_seed) {
  if (bin_count < 1 || n_record < 1) throw InvalidInput("invariant_measure: bin_count and n_record must be >= 1");
  constexpr double pi = 3.14159265358979323846;
  const CellMatrices cells(model, lambda);
  Vec2<double> dir{0.0, 1.0};
  detail::streamed_product(cells, model.mu, master_seed, 0, 1, burn_in, dir, [](const Vec2<double>&) {});
  std::vector<double> first(static_cast<std::size_t>(bin_count)), second(first.size());
  std::int64_t k = 0;
  detail::streamed_product(cells, model.mu, master_seed, 0, burn_in + 1, n_record, dir, [&](const Vec2<double>& v) {
    const auto bin = std::min<std::size_t>(static_cast<std::size_t>(projective_angle(v) / pi * bin_count),
                                           first.size() - 1);
    (2 * k < n_record ? first : second)[bin] += 1.0;
    ++k;
  });
  DirectionHistogram h;
  h.lambda = lambda;
  h.bin_count = bin_count;
  h.weights.resize(first.size());
  const double n1 = static_cast<double>((n_record + 1) / 2), n2 = static_cast<double>(n_record / 2);
  for (std::size_t i = 0; i < first.size(); ++i) {
    h.weights[i] = (first[i] + second[i]) / static_cast<double>(n_record);
    if (n2 > 0) h.drift += 0.5 * std::abs(first[i] / n1 - second[i] / n2);
  }
  return h;
}

/// Expected one-step log growth of direction v under the cell distribution.
inline double mean_log_growth(const CellMatrices& cells, const CouplingDistribution& mu, Vec2<double> v) {
  double g = 0.0;
  for (const Atom& a : mu.atoms)
    if (a.probability > 0.0) g += a.probability * std::log(norm(cells(a.value) * v));
  return g;
}

/// Histogram paired with the exact cell-distribution average at bin centres.
inline double histogram_pairing(const ModelConfig& model, const DirectionHistogram& h) {
  const CellMatrices cells(model, h.lambda);
  std::vector<double> terms(h.weights.size());
  for (int i = 0; i < h.bin_count; ++i) {
    const double t = h.bin_center(i);
    terms[i] = h.weights[i] == 0.0 ? 0.0 : h.weights[i] * mean_log_growth(cells, model.mu, {std::cos(t), std::sin(t)});
  }
  return detail::pairwise_sum(terms);
}

struct FurstenbergEstimate {
  double lambda = 0.0;
  double mean = 0.0;
  double std_error = 0.0;
  std::int64_t n_chains = 0;
};

/// Invariant-measure formula for the exponent: each chain records directions
/// after burn-in and averages the exact cell-distribution mean of
/// log |g v| over them (the histogram limit of zero bin width). Chains use
/// sample indices 0..n_chains-1 of derive_seed(seed, 1); the error is the
/// spread across chains.
inline FurstenbergEstimate furstenberg_estimate(const ModelConfig& model, double lambda, std::int64_t burn_in,
                                                std::int64_t n_record, std::int64_t n_chains,
                                                std::uint64_t master_seed, unsigned workers = 1) {
  if (n_chains < 1 || n_record < 1) throw InvalidInput("furstenberg_estimate: n_chains and n_record must be >= 1");
  const CellMatrices cells(model, lambda);
  const std::uint64_t seed = derive_seed(master_seed, 1);
  std::vector<double> chain_means(static_cast<std::size_t>(n_chains));
  detail::parallel_for(chain_means.size(), workers, [&](std::size_t c) {
    Vec2<double> dir{0.0, 1.0};
    detail::streamed_product(cells, model.mu, seed, c, 1, burn_in, dir, [](const Vec2<double>&) {});
    std::vector<double> g;
    g.reserve(static_cast<std::size_t>(n_record));
    detail::streamed_product(cells, model.mu, seed, c, burn_in + 1, n_record, dir,
                             [&](const Vec2<double>& v) { g.push_back(mean_log_growth(cells, model.mu, v)); });
    chain_means[c] = detail::pairwise_sum(g) / static_cast<double>(n_record);
  });
  const detail::MeanAndError me = detail::mean_and_error(chain_means);
  return {lambda, me.mean, me.std_error, n_chains};
}

// ---------------------------------------------------------------------------
// Moments and matrix elements

/// Monte Carlo E |U(n) x|^{-delta} with x = (0, 1).
inline double negative_moment(const ModelConfig& model, double lambda, double delta, std::int64_t n_steps,
                              std::int64_t n_samples, std::uint64_t master_seed, unsigned workers = 1) {
  if (!(delta > 0.0)) throw InvalidInput("negative_moment: delta must be positive");
  if (n_samples < 1) throw InvalidInput("negative_moment: n_samples must be >= 1");
  if (n_steps == 0) return 1.0;
  const CellMatrices cells(model, lambda);
  std::vector<double> terms(static_cast<std::size_t>(n_samples));
  detail::parallel_for(terms.size(), workers, [&](std::size_t s) {
    terms[s] = std::exp(-delta * detail::sample_log_norm(cells, model.mu, master_seed, s, n_steps, {0.0, 1.0}));
  });
  return detail::pairwise_sum(terms) / static_cast<double>(n_samples);
}

struct MatrixElementGrowth {
  double fraction = 0.0;
  double gamma_hat = 0.0;
  double epsilon = 0.0;
};

/// Fraction of samples with |<U(n) x, y>| >= exp((gamma_hat - eps) n),
/// x = (0, 1), y = (1, 0), eps = gamma_hat / 2. Without `gamma_hat` it is
/// estimated first from the stream derive_seed(seed, 1).
inline MatrixElementGrowth matrix_element_growth(const ModelConfig& model, double lambda, std::int64_t n_steps,
                                                 std::int64_t n_samples, std::uint64_t master_seed,
                                                 std::optional<double> gamma_hat = std::nullopt,
                                                 unsigned workers = 1) {
  if (n_steps < 1 || n_samples < 1) throw InvalidInput("matrix_element_growth: n_steps and n_samples must be >= 1");
  MatrixElementGrowth r;
  r.gamma_hat = gamma_hat ? *gamma_hat
                          : estimate_lyapunov(model, lambda, n_steps, n_samples, derive_seed(master_seed, 1),
                                              {{0.0, 1.0}, workers, 0})
                                .mean;
  r.epsilon = r.gamma_hat / 2.0;
  const double threshold = (r.gamma_hat - r.epsilon) * static_cast<double>(n_steps);
  const CellMatrices cells(model, lambda);
  std::vector<double> hit(static_cast<std::size_t>(n_samples));
  detail::parallel_for(hit.size(), workers, [&](std::size_t s) {
    Vec2<double> dir{0.0, 1.0};
    const double ln = detail::streamed_product(cells, model.mu, master_seed, s, 1, n_steps, dir,
                                               [](const Vec2<double>&) {});
    hit[s] = ln + std::log(std::abs(dir.x)) >= threshold ? 1.0 : 0.0;
  });
  r.fraction = detail::pairwise_sum(hit) / static_cast<double>(n_samples);
  return r;
}

// ---------------------------------------------------------------------------
// Hoelder diagnostic

struct HolderFit {
  double alpha = 0.0;
  double constant = 0.0;
  /// Largest |d gamma| among pairs, for scale against the Monte Carlo error.
  double max_difference = 0.0;
};

/// Fits |g(l) - g(l')| <= C |l - l'|^alpha over all pairs of a profile by
/// least squares in log-log coordinates, then takes the smallest C that
/// bounds every pair. Diagnostic only.
inline HolderFit holder_fit(const std::vector<LyapunovEstimate>& profile) {
  std::vector<double> xs, ys;
  HolderFit fit;
  for (std::size_t i = 0; i < profile.size(); ++i)
    for (std::size_t j = i + 1; j < profile.size(); ++j) {
      const double dl = std::abs(profile[i].lambda - profile[j].lambda);
      const double dg = std::abs(profile[i].mean - profile[j].mean);
      fit.max_difference = std::max(fit.max_difference, dg);
      if (dl > 0.0 && dg > 0.0) {
        xs.push_back(std::log(dl));
        ys.push_back(std::log(dg));
      }
    }
  if (xs.size() < 2) return fit;
  const double n = static_cast<double>(xs.size());
  const double mx = detail::pairwise_sum(xs) / n, my = detail::pairwise_sum(ys) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxy += (xs[k] - mx) * (ys[k] - my);
    sxx += (xs[k] - mx) * (xs[k] - mx);
  }
  fit.alpha = sxx > 0.0 ? sxy / sxx : 0.0;
  double log_c = -INFINITY;
  for (std::size_t k = 0; k < xs.size(); ++k) log_c = std::max(log_c, ys[k] - fit.alpha * xs[k]);
  fit.constant = std::exp(log_c);
  return fit;
}

}  // namespace alloy1d
