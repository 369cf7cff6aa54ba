#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "mvrbm/rbm.hpp"
#include "mvrbm/rng.hpp"

namespace mvrbm {

/// Inverse CDF of the continuous unit conditional p(h) ~ e^{lambda h} on
/// [-1,+1]. Evaluated as -1 + ln(1 + u(e^{2L}-1))/L, which is the textbook
/// expression rearranged so nothing overflows until 2|lambda| ~ 700; beyond
/// that the equivalent big-field form 1 + ln(u + (1-u)e^{-2L})/L is used.
/// Negative lambda goes through the h -> -h symmetry with u -> 1-u, so a
/// given u always maps to the same value. F^{-1}(0) = -1, F^{-1}(1) = +1.
inline double continuous_inverse_cdf(double lambda, double u) {
  if (std::fabs(lambda) < 1e-8) return 2.0 * u - 1.0;  // analytic limit at lambda = 0
  if (lambda < 0.0) return -continuous_inverse_cdf(-lambda, 1.0 - u);
  if (lambda < 350.0) return std::log1p(u * std::expm1(2.0 * lambda)) / lambda - 1.0;
  if (u == 0.0) return -1.0;
  return 1.0 + std::log(u + (1.0 - u) * std::exp(-2.0 * lambda)) / lambda;
}

/// One hidden unit given its field. Finite levels: categorical with weights
/// ~ e^{lambda h}, max-shifted; continuous: inverse transform.
inline double sample_unit(const LevelSpec& levels, double lambda, RngStream& rng) {
  if (levels.is_continuous()) return continuous_inverse_cdf(lambda, rng.uniform01());
  const int s = levels.s();
  double max_e = std::fabs(lambda);  // max over levels of lambda*h is at h = +-1
  double total = 0.0;
  std::vector<double> weights(s + 1);
  for (int k = 0; k <= s; ++k) {
    const double h = (2.0 * k - s) / s;
    weights[k] = std::exp(lambda * h - max_e);
    total += weights[k];
  }
  const double target = rng.uniform01() * total;
  double cum = 0.0;
  for (int k = 0; k <= s; ++k) {
    cum += weights[k];
    if (target < cum) return (2.0 * k - s) / s;
  }
  return 1.0;  // target == total under rounding
}

/// v_i = +1 with probability e^{xi_i} / (e^{xi_i} + e^{-xi_i}).
inline std::vector<double> sample_visible(const RbmParams& p, std::span<const double> h,
                                          RngStream& rng) {
  const std::vector<double> xi = visible_fields(p, h);
  std::vector<double> v(p.n_visible());
  for (int i = 0; i < p.n_visible(); ++i) {
    const double prob_up = 1.0 / (1.0 + std::exp(-2.0 * xi[i]));
    v[i] = rng.uniform01() < prob_up ? 1.0 : -1.0;
  }
  return v;
}

inline std::vector<double> sample_hidden(const RbmParams& p, std::span<const double> v,
                                         RngStream& rng) {
  const std::vector<double> lambda = hidden_fields(p, v);
  std::vector<double> h(p.n_hidden());
  for (int j = 0; j < p.n_hidden(); ++j) h[j] = sample_unit(p.levels, lambda[j], rng);
  return h;
}

/// One blocked sweep: h ~ p(h|v), then v' ~ p(v|h).
inline std::pair<std::vector<double>, std::vector<double>> gibbs_step(
    const RbmParams& p, std::span<const double> v, RngStream& rng) {
  std::vector<double> h = sample_hidden(p, v, rng);
  std::vector<double> v_next = sample_visible(p, h, rng);
  return {std::move(v_next), std::move(h)};
}

/// Run a single chain from a uniform random start, drop burn_in sweeps, then
/// record every thin-th visible state.
inline SpinDataset generate_dataset(const RbmParams& p, int n_points, int burn_in, int thin,
                                    RngStream& rng) {
  detail::require(n_points >= 1, "generate_dataset: n_points must be >= 1");
  detail::require(burn_in >= 0, "generate_dataset: burn_in must be >= 0");
  detail::require(thin >= 1, "generate_dataset: thin must be >= 1");
  std::vector<double> v(p.n_visible());
  for (double& x : v) x = rng.uniform01() < 0.5 ? -1.0 : 1.0;
  for (int t = 0; t < burn_in; ++t) v = gibbs_step(p, v, rng).first;
  SpinDataset data(p.n_visible());
  for (int n = 0; n < n_points; ++n) {
    for (int t = 0; t < thin; ++t) v = gibbs_step(p, v, rng).first;
    data.add(v);
  }
  return data;
}

}  // namespace mvrbm
