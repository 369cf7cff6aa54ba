#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "mvrbm/levels.hpp"
#include "mvrbm/matrix.hpp"

namespace mvrbm {

namespace detail {

inline void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

/// Streaming log-sum-exp with a running max shift; fixed accumulation order.
class LogSumExp {
 public:
  void add(double z) {
    if (z <= max_) {
      acc_ += std::exp(z - max_);
    } else {
      acc_ = acc_ * std::exp(max_ - z) + 1.0;
      max_ = z;
    }
  }
  double value() const { return max_ + std::log(acc_); }

 private:
  double max_ = -std::numeric_limits<double>::infinity();
  double acc_ = 0.0;
};

}  // namespace detail

// Enumeration over {-1,+1}^|V| is exponential; refuse beyond this rather
// than hang.
inline constexpr int kMaxExactVisible = 24;

/// Parameters of an RBM with binary (+-1) visible units and multilevel
/// hidden units: visible biases b, hidden biases c, couplings W (|V| x |H|).
struct RbmParams {
  std::vector<double> visible_bias;
  std::vector<double> hidden_bias;
  Matrix coupling;
  LevelSpec levels;

  RbmParams() = default;
  RbmParams(int n_visible, int n_hidden, LevelSpec lv)
      : visible_bias(n_visible, 0.0),
        hidden_bias(n_hidden, 0.0),
        coupling(n_visible, n_hidden),
        levels(lv) {
    detail::require(n_visible >= 1 && n_hidden >= 1, "RbmParams: empty layer");
  }

  int n_visible() const { return static_cast<int>(visible_bias.size()); }
  int n_hidden() const { return static_cast<int>(hidden_bias.size()); }

  friend bool operator==(const RbmParams& a, const RbmParams& b) = default;
};

/// Gradient (or any tangent vector) shaped like RbmParams.
struct RbmGradient {
  std::vector<double> visible_bias;
  std::vector<double> hidden_bias;
  Matrix coupling;

  RbmGradient() = default;
  RbmGradient(int n_visible, int n_hidden)
      : visible_bias(n_visible, 0.0), hidden_bias(n_hidden, 0.0), coupling(n_visible, n_hidden) {}
};

/// N visible configurations, each a vector in {-1,+1}^|V|, stored flat.
class SpinDataset {
 public:
  SpinDataset() : n_visible_(0) {}
  explicit SpinDataset(int n_visible) : n_visible_(n_visible) {
    detail::require(n_visible >= 1, "SpinDataset: n_visible must be >= 1");
  }

  void add(std::span<const double> v) {
    detail::require(static_cast<int>(v.size()) == n_visible_, "SpinDataset: wrong point size");
    for (double x : v)
      detail::require(x == 1.0 || x == -1.0, "SpinDataset: entries must be exactly +-1");
    values_.insert(values_.end(), v.begin(), v.end());
  }

  int n_points() const { return n_visible_ ? static_cast<int>(values_.size()) / n_visible_ : 0; }
  int n_visible() const { return n_visible_; }

  std::span<const double> point(int i) const {
    return {values_.data() + static_cast<std::size_t>(i) * n_visible_,
            static_cast<std::size_t>(n_visible_)};
  }

  SpinDataset subset(std::span<const int> indices) const {
    SpinDataset out(n_visible_);
    for (int i : indices) out.add(point(i));
    return out;
  }

 private:
  int n_visible_;
  std::vector<double> values_;
};

/// Exact model expectations <v_i>, <h_j>, <v_i h_j>.
struct ExactMoments {
  std::vector<double> mean_v;
  std::vector<double> mean_h;
  Matrix corr_vh;
};

// E(v,h) = -b.v - c.h - v.W.h
inline double energy(const RbmParams& p, std::span<const double> v, std::span<const double> h) {
  detail::require(static_cast<int>(v.size()) == p.n_visible(), "energy: |v| mismatch");
  detail::require(static_cast<int>(h.size()) == p.n_hidden(), "energy: |h| mismatch");
  double e = 0.0;
  for (int i = 0; i < p.n_visible(); ++i) e -= p.visible_bias[i] * v[i];
  for (int j = 0; j < p.n_hidden(); ++j) e -= p.hidden_bias[j] * h[j];
  for (int i = 0; i < p.n_visible(); ++i) {
    const auto w = p.coupling.row(i);
    double acc = 0.0;
    for (int j = 0; j < p.n_hidden(); ++j) acc += w[j] * h[j];
    e -= v[i] * acc;
  }
  return e;
}

/// Hidden-unit fields lambda_j = c_j + sum_i W_ij v_i.
inline std::vector<double> hidden_fields(const RbmParams& p, std::span<const double> v) {
  detail::require(static_cast<int>(v.size()) == p.n_visible(), "hidden_fields: |v| mismatch");
  std::vector<double> lambda(p.hidden_bias);
  for (int i = 0; i < p.n_visible(); ++i) {
    const double vi = v[i];
    const auto w = p.coupling.row(i);
    for (int j = 0; j < p.n_hidden(); ++j) lambda[j] += w[j] * vi;
  }
  return lambda;
}

/// Visible-unit fields xi_i = b_i + sum_j W_ij h_j.
inline std::vector<double> visible_fields(const RbmParams& p, std::span<const double> h) {
  detail::require(static_cast<int>(h.size()) == p.n_hidden(), "visible_fields: |h| mismatch");
  std::vector<double> xi(p.visible_bias);
  for (int i = 0; i < p.n_visible(); ++i) {
    const auto w = p.coupling.row(i);
    double acc = 0.0;
    for (int j = 0; j < p.n_hidden(); ++j) acc += w[j] * h[j];
    xi[i] += acc;
  }
  return xi;
}

/// ln of the unnormalized marginal weight of v: b.v + sum_j ln phi(lambda_j).
/// Subtracting the exact log partition gives the exact log probability.
inline double unnormalized_log_marginal(const RbmParams& p, std::span<const double> v) {
  const std::vector<double> lambda = hidden_fields(p, v);
  double r = 0.0;
  for (int i = 0; i < p.n_visible(); ++i) r += p.visible_bias[i] * v[i];
  for (double l : lambda) r += log_unit_partition(p.levels, l);
  return r;
}

namespace detail {

inline void check_enumerable(const RbmParams& p, const char* what) {
  if (p.n_visible() > kMaxExactVisible)
    throw std::length_error(std::string(what) + ": exact enumeration bounded at |V| <= " +
                            std::to_string(kMaxExactVisible));
}

/// Write the m-th visible configuration (bit i of m selects v_i = +1).
inline void spin_state(std::uint32_t m, std::span<double> v) {
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = (m >> i) & 1u ? 1.0 : -1.0;
}

}  // namespace detail

/// Exact ln Z by enumerating all 2^|V| visible states; hidden layers are
/// marginalized analytically so the cost is independent of s (and exact at
/// s = infinity). Includes the level-weight factor carried inside phi.
inline double exact_log_partition(const RbmParams& p) {
  detail::check_enumerable(p, "exact_log_partition");
  const std::uint32_t n_states = 1u << p.n_visible();
  std::vector<double> v(p.n_visible());
  detail::LogSumExp lse;
  for (std::uint32_t m = 0; m < n_states; ++m) {
    detail::spin_state(m, v);
    lse.add(unnormalized_log_marginal(p, v));
  }
  return lse.value();
}

inline ExactMoments exact_moments(const RbmParams& p) {
  detail::check_enumerable(p, "exact_moments");
  const double log_z = exact_log_partition(p);
  const std::uint32_t n_states = 1u << p.n_visible();
  ExactMoments mom{std::vector<double>(p.n_visible(), 0.0),
                   std::vector<double>(p.n_hidden(), 0.0),
                   Matrix(p.n_visible(), p.n_hidden())};
  std::vector<double> v(p.n_visible());
  for (std::uint32_t m = 0; m < n_states; ++m) {
    detail::spin_state(m, v);
    const std::vector<double> lambda = hidden_fields(p, v);
    double lw = 0.0;
    for (int i = 0; i < p.n_visible(); ++i) lw += p.visible_bias[i] * v[i];
    for (double l : lambda) lw += log_unit_partition(p.levels, l);
    const double prob = std::exp(lw - log_z);
    for (int j = 0; j < p.n_hidden(); ++j) {
      const double hj = unit_mean(p.levels, lambda[j]);
      mom.mean_h[j] += prob * hj;
      for (int i = 0; i < p.n_visible(); ++i) mom.corr_vh(i, j) += prob * v[i] * hj;
    }
    for (int i = 0; i < p.n_visible(); ++i) mom.mean_v[i] += prob * v[i];
  }
  return mom;
}

/// Mean log probability of the data under the exact marginal.
inline double exact_log_likelihood(const RbmParams& p, const SpinDataset& data) {
  detail::check_enumerable(p, "exact_log_likelihood");
  detail::require(data.n_points() >= 1, "exact_log_likelihood: empty dataset");
  detail::require(data.n_visible() == p.n_visible(), "exact_log_likelihood: |V| mismatch");
  const double log_z = exact_log_partition(p);
  double acc = 0.0;
  for (int mu = 0; mu < data.n_points(); ++mu)
    acc += unnormalized_log_marginal(p, data.point(mu)) - log_z;
  return acc / data.n_points();
}

/// Data-side statistics of the log-likelihood gradient: per-point averages of
/// v_i, psi(lambda_j), and v_i psi(lambda_j).
inline RbmGradient data_statistics(const RbmParams& p, const SpinDataset& data) {
  detail::require(data.n_points() >= 1, "data_statistics: empty dataset");
  detail::require(data.n_visible() == p.n_visible(), "data_statistics: |V| mismatch");
  RbmGradient g(p.n_visible(), p.n_hidden());
  for (int mu = 0; mu < data.n_points(); ++mu) {
    const auto v = data.point(mu);
    const std::vector<double> lambda = hidden_fields(p, v);
    for (int i = 0; i < p.n_visible(); ++i) g.visible_bias[i] += v[i];
    for (int j = 0; j < p.n_hidden(); ++j) {
      const double hj = unit_mean(p.levels, lambda[j]);
      g.hidden_bias[j] += hj;
      for (int i = 0; i < p.n_visible(); ++i) g.coupling(i, j) += v[i] * hj;
    }
  }
  const double inv_n = 1.0 / data.n_points();
  for (double& x : g.visible_bias) x *= inv_n;
  for (double& x : g.hidden_bias) x *= inv_n;
  for (int i = 0; i < p.n_visible(); ++i)
    for (int j = 0; j < p.n_hidden(); ++j) g.coupling(i, j) *= inv_n;
  return g;
}

/// Exact log-likelihood gradient: data statistics minus exact model moments.
inline RbmGradient exact_gradient(const RbmParams& p, const SpinDataset& data) {
  detail::check_enumerable(p, "exact_gradient");
  RbmGradient g = data_statistics(p, data);
  const ExactMoments mom = exact_moments(p);
  for (int i = 0; i < p.n_visible(); ++i) g.visible_bias[i] -= mom.mean_v[i];
  for (int j = 0; j < p.n_hidden(); ++j) g.hidden_bias[j] -= mom.mean_h[j];
  for (int i = 0; i < p.n_visible(); ++i)
    for (int j = 0; j < p.n_hidden(); ++j) g.coupling(i, j) -= mom.corr_vh(i, j);
  return g;
}

}  // namespace mvrbm
