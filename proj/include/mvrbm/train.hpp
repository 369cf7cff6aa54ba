#pragma once

#include <cmath>
#include <numeric>
#include <utility>
#include <vector>

#include "mvrbm/drbm.hpp"
#include "mvrbm/gibbs.hpp"
#include "mvrbm/optim.hpp"
#include "mvrbm/rbm.hpp"
#include "mvrbm/rng.hpp"

namespace mvrbm {

/// Xavier half-width sqrt(6 / (fan_in + fan_out)).
inline double xavier_radius(int fan_in, int fan_out) {
  return std::sqrt(6.0 / (fan_in + fan_out));
}

/// Generator-style initialization: biases ~ N(0, 0.1^2), couplings Xavier
/// uniform. Draw order is fixed (b, c, then W row-major) so a seed pins the
/// parameters exactly.
inline RbmParams init_generative(int n_visible, int n_hidden, LevelSpec levels, RngStream& rng) {
  RbmParams p(n_visible, n_hidden, levels);
  for (double& b : p.visible_bias) b = rng.gaussian(0.0, 0.1);
  for (double& c : p.hidden_bias) c = rng.gaussian(0.0, 0.1);
  const double r = xavier_radius(n_visible, n_hidden);
  for (int i = 0; i < n_visible; ++i)
    for (int j = 0; j < n_hidden; ++j) p.coupling(i, j) = rng.uniform(-r, r);
  return p;
}

/// Trainee initialization: biases exactly zero, couplings Xavier uniform.
inline RbmParams init_trainee(int n_visible, int n_hidden, LevelSpec levels, RngStream& rng) {
  RbmParams p(n_visible, n_hidden, levels);
  const double r = xavier_radius(n_visible, n_hidden);
  for (int i = 0; i < n_visible; ++i)
    for (int j = 0; j < n_hidden; ++j) p.coupling(i, j) = rng.uniform(-r, r);
  return p;
}

/// Classifier initialization: biases zero, each coupling block Xavier with
/// its own fan sizes (n+|H| for the input block, |H|+K for the class block).
inline DrbmParams init_classifier(int n_inputs, int n_hidden, int n_classes, LevelSpec levels,
                                  RngStream& rng) {
  DrbmParams p(n_inputs, n_hidden, n_classes, levels);
  const double r1 = xavier_radius(n_inputs, n_hidden);
  for (int i = 0; i < n_inputs; ++i)
    for (int j = 0; j < n_hidden; ++j) p.input_coupling(i, j) = rng.uniform(-r1, r1);
  const double r2 = xavier_radius(n_hidden, n_classes);
  for (int j = 0; j < n_hidden; ++j)
    for (int k = 0; k < n_classes; ++k) p.class_coupling(j, k) = rng.uniform(-r2, r2);
  return p;
}

/// CD-k gradient estimate. Positive phase: exact data statistics. Negative
/// phase: k Gibbs sweeps from each data point, then the same statistics on
/// the final visible states with the hidden layer marginalized through psi
/// (lower variance than plugging in sampled h, identical expectation).
inline RbmGradient cd_gradient(const RbmParams& p, const SpinDataset& batch, int k,
                               RngStream& rng) {
  detail::require(batch.n_points() >= 1, "cd_gradient: empty batch");
  detail::require(k >= 1, "cd_gradient: k must be >= 1");
  RbmGradient g = data_statistics(p, batch);
  RbmGradient neg(p.n_visible(), p.n_hidden());
  for (int mu = 0; mu < batch.n_points(); ++mu) {
    std::vector<double> v(batch.point(mu).begin(), batch.point(mu).end());
    for (int t = 0; t < k; ++t) v = gibbs_step(p, v, rng).first;
    const std::vector<double> lambda = hidden_fields(p, v);
    for (int i = 0; i < p.n_visible(); ++i) neg.visible_bias[i] += v[i];
    for (int j = 0; j < p.n_hidden(); ++j) {
      const double hj = unit_mean(p.levels, lambda[j]);
      neg.hidden_bias[j] += hj;
      for (int i = 0; i < p.n_visible(); ++i) neg.coupling(i, j) += v[i] * hj;
    }
  }
  const double inv_n = 1.0 / batch.n_points();
  for (int i = 0; i < p.n_visible(); ++i) g.visible_bias[i] -= inv_n * neg.visible_bias[i];
  for (int j = 0; j < p.n_hidden(); ++j) g.hidden_bias[j] -= inv_n * neg.hidden_bias[j];
  for (int i = 0; i < p.n_visible(); ++i)
    for (int j = 0; j < p.n_hidden(); ++j) g.coupling(i, j) -= inv_n * neg.coupling(i, j);
  return g;
}

namespace detail {

// Flat parameter order: biases first, then couplings row-major.
inline std::vector<double> flatten(const RbmParams& p) {
  std::vector<double> flat;
  flat.reserve(p.visible_bias.size() + p.hidden_bias.size() + p.coupling.size());
  flat.insert(flat.end(), p.visible_bias.begin(), p.visible_bias.end());
  flat.insert(flat.end(), p.hidden_bias.begin(), p.hidden_bias.end());
  flat.insert(flat.end(), p.coupling.data(), p.coupling.data() + p.coupling.size());
  return flat;
}

inline std::vector<double> flatten(const RbmGradient& g) {
  std::vector<double> flat;
  flat.reserve(g.visible_bias.size() + g.hidden_bias.size() + g.coupling.size());
  flat.insert(flat.end(), g.visible_bias.begin(), g.visible_bias.end());
  flat.insert(flat.end(), g.hidden_bias.begin(), g.hidden_bias.end());
  flat.insert(flat.end(), g.coupling.data(), g.coupling.data() + g.coupling.size());
  return flat;
}

inline void unflatten(std::span<const double> flat, RbmParams& p) {
  std::size_t at = 0;
  for (double& b : p.visible_bias) b = flat[at++];
  for (double& c : p.hidden_bias) c = flat[at++];
  std::copy(flat.begin() + at, flat.end(), p.coupling.data());
}

inline std::vector<double> flatten(const DrbmParams& p) {
  std::vector<double> flat;
  flat.insert(flat.end(), p.class_bias.begin(), p.class_bias.end());
  flat.insert(flat.end(), p.hidden_bias.begin(), p.hidden_bias.end());
  flat.insert(flat.end(), p.input_coupling.data(), p.input_coupling.data() + p.input_coupling.size());
  flat.insert(flat.end(), p.class_coupling.data(), p.class_coupling.data() + p.class_coupling.size());
  return flat;
}

inline std::vector<double> flatten(const DrbmGradient& g) {
  std::vector<double> flat;
  flat.insert(flat.end(), g.class_bias.begin(), g.class_bias.end());
  flat.insert(flat.end(), g.hidden_bias.begin(), g.hidden_bias.end());
  flat.insert(flat.end(), g.input_coupling.data(), g.input_coupling.data() + g.input_coupling.size());
  flat.insert(flat.end(), g.class_coupling.data(), g.class_coupling.data() + g.class_coupling.size());
  return flat;
}

inline void unflatten(std::span<const double> flat, DrbmParams& p) {
  std::size_t at = 0;
  for (double& b : p.class_bias) b = flat[at++];
  for (double& c : p.hidden_bias) c = flat[at++];
  std::copy(flat.begin() + at, flat.begin() + at + p.input_coupling.size(), p.input_coupling.data());
  at += p.input_coupling.size();
  std::copy(flat.begin() + at, flat.end(), p.class_coupling.data());
}

/// Epoch-shuffled mini-batch index ranges; B = 0 means one full batch.
inline std::vector<std::vector<int>> epoch_batches(int n_points, int batch_size, RngStream& rng) {
  std::vector<int> order(n_points);
  std::iota(order.begin(), order.end(), 0);
  if (batch_size == 0 || batch_size >= n_points) return {std::move(order)};
  for (int i = n_points - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(i) + 1));
    std::swap(order[i], order[j]);
  }
  std::vector<std::vector<int>> batches;
  for (int at = 0; at < n_points; at += batch_size) {
    const int end = std::min(at + batch_size, n_points);
    batches.emplace_back(order.begin() + at, order.begin() + end);
  }
  return batches;
}

}  // namespace detail

template <typename P>
struct TrainResult {
  P params;
  long updates = 0;
};

/// CD training loop: per epoch, one optimizer update per (mini-)batch, then
/// the observer is called with (epoch, current params).
template <typename Observer>
TrainResult<RbmParams> train_rbm(RbmParams model, const SpinDataset& data, const TrainConfig& cfg,
                                 Observer&& observe) {
  cfg.validate();
  detail::require(data.n_points() >= 1, "train_rbm: empty dataset");
  detail::require(data.n_visible() == model.n_visible(), "train_rbm: |V| mismatch");
  RngStream rng(cfg.seed);
  std::vector<double> flat = detail::flatten(model);
  Optimizer opt(cfg, flat.size());
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (const auto& batch_idx : detail::epoch_batches(data.n_points(), cfg.batch_size, rng)) {
      const SpinDataset batch = data.subset(batch_idx);
      const RbmGradient grad = cd_gradient(model, batch, cfg.cd_k, rng);
      opt.update(flat, detail::flatten(grad));
      detail::unflatten(flat, model);
    }
    observe(epoch, std::as_const(model));
  }
  return {std::move(model), opt.steps()};
}

inline TrainResult<RbmParams> train_rbm(RbmParams model, const SpinDataset& data,
                                        const TrainConfig& cfg) {
  return train_rbm(std::move(model), data, cfg, [](int, const RbmParams&) {});
}

/// Gradient-ascent training of the classifier with its exact gradient; the
/// stream only drives mini-batch shuffling.
template <typename Observer>
TrainResult<DrbmParams> train_classifier(DrbmParams model, const LabeledDataset& data,
                                         const TrainConfig& cfg, Observer&& observe) {
  cfg.validate();
  detail::require(data.n_points() >= 1, "train_classifier: empty dataset");
  detail::require(data.n_inputs() == model.n_inputs() && data.n_classes() == model.n_classes(),
                  "train_classifier: shape mismatch");
  RngStream rng(cfg.seed);
  std::vector<double> flat = detail::flatten(model);
  Optimizer opt(cfg, flat.size());
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (const auto& batch_idx : detail::epoch_batches(data.n_points(), cfg.batch_size, rng)) {
      const LabeledDataset batch = data.subset(batch_idx);
      const DrbmGradient grad = drbm_gradient(model, batch);
      opt.update(flat, detail::flatten(grad));
      detail::unflatten(flat, model);
    }
    observe(epoch, std::as_const(model));
  }
  return {std::move(model), opt.steps()};
}

inline TrainResult<DrbmParams> train_classifier(DrbmParams model, const LabeledDataset& data,
                                                const TrainConfig& cfg) {
  return train_classifier(std::move(model), data, cfg, [](int, const DrbmParams&) {});
}

}  // namespace mvrbm
