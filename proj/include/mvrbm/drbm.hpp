#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "mvrbm/levels.hpp"
#include "mvrbm/matrix.hpp"
#include "mvrbm/rbm.hpp"

namespace mvrbm {

/// Discriminative RBM: p(class | input) obtained from an RBM whose visible
/// layer is split into a continuous input part x and a 1-of-K output part.
/// input_coupling is n x |H|, class_coupling is |H| x K.
struct DrbmParams {
  std::vector<double> class_bias;
  std::vector<double> hidden_bias;
  Matrix input_coupling;
  Matrix class_coupling;
  LevelSpec levels;

  DrbmParams() = default;
  DrbmParams(int n_inputs, int n_hidden, int n_classes, LevelSpec lv)
      : class_bias(n_classes, 0.0),
        hidden_bias(n_hidden, 0.0),
        input_coupling(n_inputs, n_hidden),
        class_coupling(n_hidden, n_classes),
        levels(lv) {
    detail::require(n_classes >= 2, "DrbmParams: need at least two classes");
    detail::require(n_inputs >= 1 && n_hidden >= 1, "DrbmParams: empty layer");
  }

  int n_inputs() const { return input_coupling.rows(); }
  int n_hidden() const { return static_cast<int>(hidden_bias.size()); }
  int n_classes() const { return static_cast<int>(class_bias.size()); }

  friend bool operator==(const DrbmParams& a, const DrbmParams& b) = default;
};

struct DrbmGradient {
  std::vector<double> class_bias;
  std::vector<double> hidden_bias;
  Matrix input_coupling;
  Matrix class_coupling;

  DrbmGradient() = default;
  DrbmGradient(int n_inputs, int n_hidden, int n_classes)
      : class_bias(n_classes, 0.0),
        hidden_bias(n_hidden, 0.0),
        input_coupling(n_inputs, n_hidden),
        class_coupling(n_hidden, n_classes) {}
};

/// N labeled points (x in R^n, class index in 0..K-1), stored flat.
class LabeledDataset {
 public:
  LabeledDataset() : n_inputs_(0), n_classes_(0) {}
  LabeledDataset(int n_inputs, int n_classes) : n_inputs_(n_inputs), n_classes_(n_classes) {
    detail::require(n_inputs >= 1, "LabeledDataset: n_inputs must be >= 1");
    detail::require(n_classes >= 2, "LabeledDataset: need at least two classes");
  }

  void add(std::span<const double> x, int label) {
    detail::require(static_cast<int>(x.size()) == n_inputs_, "LabeledDataset: wrong input size");
    detail::require(label >= 0 && label < n_classes_, "LabeledDataset: label out of range");
    inputs_.insert(inputs_.end(), x.begin(), x.end());
    labels_.push_back(label);
  }

  int n_points() const { return static_cast<int>(labels_.size()); }
  int n_inputs() const { return n_inputs_; }
  int n_classes() const { return n_classes_; }

  std::span<const double> input(int i) const {
    return {inputs_.data() + static_cast<std::size_t>(i) * n_inputs_,
            static_cast<std::size_t>(n_inputs_)};
  }
  int label(int i) const { return labels_[i]; }

  LabeledDataset subset(std::span<const int> indices) const {
    LabeledDataset out(n_inputs_, n_classes_);
    for (int i : indices) out.add(input(i), label(i));
    return out;
  }

 private:
  int n_inputs_, n_classes_;
  std::vector<double> inputs_;
  std::vector<int> labels_;
};

namespace detail {

/// Fields the hidden layer sees from the input alone: c_j + sum_i W1_ij x_i.
/// The class contribution W2_jk is added per class on top of this.
inline std::vector<double> input_fields(const DrbmParams& p, std::span<const double> x) {
  require(static_cast<int>(x.size()) == p.n_inputs(), "DRBM: input size mismatch");
  std::vector<double> f(p.hidden_bias);
  for (int i = 0; i < p.n_inputs(); ++i) {
    const double xi = x[i];
    const auto w = p.input_coupling.row(i);
    for (int j = 0; j < p.n_hidden(); ++j) f[j] += w[j] * xi;
  }
  return f;
}

/// Unnormalized class log scores b_k + sum_j ln phi(f_j + W2_jk).
inline std::vector<double> class_scores(const DrbmParams& p, std::span<const double> f) {
  std::vector<double> scores(p.class_bias);
  for (int j = 0; j < p.n_hidden(); ++j) {
    const auto w2 = p.class_coupling.row(j);
    for (int k = 0; k < p.n_classes(); ++k)
      scores[k] += log_unit_partition(p.levels, f[j] + w2[k]);
  }
  return scores;
}

inline void log_normalize(std::span<double> scores) {
  double max_s = scores[0];
  for (double s : scores) max_s = std::max(max_s, s);
  double total = 0.0;
  for (double s : scores) total += std::exp(s - max_s);
  const double log_z = max_s + std::log(total);
  for (double& s : scores) s -= log_z;
}

}  // namespace detail

/// Hidden fields for a given (class, input): zeta_j = c_j + W2_jk + sum_i W1_ij x_i.
inline std::vector<double> class_hidden_fields(const DrbmParams& p, int label,
                                               std::span<const double> x) {
  detail::require(label >= 0 && label < p.n_classes(), "class_hidden_fields: label out of range");
  std::vector<double> zeta = detail::input_fields(p, x);
  for (int j = 0; j < p.n_hidden(); ++j) zeta[j] += p.class_coupling(j, label);
  return zeta;
}

/// Log class probabilities ln p(class = k | x); exponentials sum to one.
inline std::vector<double> class_log_probs(const DrbmParams& p, std::span<const double> x) {
  for (double xi : x)
    if (!std::isfinite(xi)) throw std::domain_error("class_log_probs: non-finite input");
  const std::vector<double> f = detail::input_fields(p, x);
  std::vector<double> scores = detail::class_scores(p, f);
  detail::log_normalize(scores);
  return scores;
}

/// Most probable class; ties resolve to the lowest index.
inline int predict_class(const DrbmParams& p, std::span<const double> x) {
  const std::vector<double> lp = class_log_probs(p, x);
  int best = 0;
  for (int k = 1; k < p.n_classes(); ++k)
    if (lp[k] > lp[best]) best = k;
  return best;
}

/// Mean conditional log-likelihood over the dataset.
inline double drbm_log_likelihood(const DrbmParams& p, const LabeledDataset& data) {
  detail::require(data.n_points() >= 1, "drbm_log_likelihood: empty dataset");
  detail::require(data.n_inputs() == p.n_inputs() && data.n_classes() == p.n_classes(),
                  "drbm_log_likelihood: shape mismatch");
  double acc = 0.0;
  for (int mu = 0; mu < data.n_points(); ++mu)
    acc += class_log_probs(p, data.input(mu))[data.label(mu)];
  return acc / data.n_points();
}

/// Exact gradient of the conditional log-likelihood (no sampling involved;
/// the class expectation is a K-term sum).
inline DrbmGradient drbm_gradient(const DrbmParams& p, const LabeledDataset& batch) {
  detail::require(batch.n_points() >= 1, "drbm_gradient: empty batch");
  detail::require(batch.n_inputs() == p.n_inputs() && batch.n_classes() == p.n_classes(),
                  "drbm_gradient: shape mismatch");
  const int nh = p.n_hidden(), nk = p.n_classes(), nx = p.n_inputs();
  DrbmGradient g(nx, nh, nk);
  Matrix psi(nh, nk);  // psi(zeta_j(1_k, x)) for the current point
  std::vector<double> probs(nk), residual(nh);
  for (int mu = 0; mu < batch.n_points(); ++mu) {
    const auto x = batch.input(mu);
    const int t = batch.label(mu);
    const std::vector<double> f = detail::input_fields(p, x);
    probs = detail::class_scores(p, f);
    detail::log_normalize(probs);
    for (double& lp : probs) lp = std::exp(lp);
    for (int j = 0; j < nh; ++j) {
      const auto w2 = p.class_coupling.row(j);
      for (int k = 0; k < nk; ++k) psi(j, k) = unit_mean(p.levels, f[j] + w2[k]);
    }
    for (int k = 0; k < nk; ++k) g.class_bias[k] += (k == t ? 1.0 : 0.0) - probs[k];
    for (int j = 0; j < nh; ++j) {
      double expect = 0.0;
      for (int k = 0; k < nk; ++k) expect += psi(j, k) * probs[k];
      residual[j] = psi(j, t) - expect;
      g.hidden_bias[j] += residual[j];
      for (int k = 0; k < nk; ++k)
        g.class_coupling(j, k) += psi(j, k) * ((k == t ? 1.0 : 0.0) - probs[k]);
    }
    for (int i = 0; i < nx; ++i) {
      const double xi = x[i];
      auto row = g.input_coupling.row(i);
      for (int j = 0; j < nh; ++j) row[j] += xi * residual[j];
    }
  }
  const double inv_n = 1.0 / batch.n_points();
  for (double& v : g.class_bias) v *= inv_n;
  for (double& v : g.hidden_bias) v *= inv_n;
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < nh; ++j) g.input_coupling(i, j) *= inv_n;
  for (int j = 0; j < nh; ++j)
    for (int k = 0; k < nk; ++k) g.class_coupling(j, k) *= inv_n;
  return g;
}

}  // namespace mvrbm
