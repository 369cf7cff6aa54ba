#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mvrbm {

enum class OptimizerKind { Adam, AdaMax };

inline std::string to_string(OptimizerKind k) {
  return k == OptimizerKind::Adam ? "adam" : "adamax";
}

inline OptimizerKind parse_optimizer(const std::string& name) {
  if (name == "adam") return OptimizerKind::Adam;
  if (name == "adamax") return OptimizerKind::AdaMax;
  throw std::invalid_argument("unknown optimizer \"" + name + "\"");
}

struct TrainConfig {
  OptimizerKind optimizer = OptimizerKind::Adam;
  double alpha = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int epochs = 1000;
  int batch_size = 0;  // 0 = full batch
  int cd_k = 1;
  std::uint64_t seed = 1;

  void validate() const {
    if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
    if (cd_k < 1) throw std::invalid_argument("TrainConfig: cd_k must be >= 1");
    if (batch_size < 0) throw std::invalid_argument("TrainConfig: batch_size must be >= 0");
    if (!(alpha > 0.0)) throw std::invalid_argument("TrainConfig: alpha must be > 0");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
      throw std::invalid_argument("TrainConfig: betas must lie in [0, 1)");
    if (!(epsilon > 0.0)) throw std::invalid_argument("TrainConfig: epsilon must be > 0");
  }
};

/// First/second-moment state for Adam or AdaMax, stepping in the ascent
/// direction (log-likelihoods here are maximized). A non-finite gradient
/// raises before any state is touched.
class Optimizer {
 public:
  Optimizer(const TrainConfig& cfg, std::size_t n_params)
      : kind_(cfg.optimizer),
        alpha_(cfg.alpha),
        beta1_(cfg.beta1),
        beta2_(cfg.beta2),
        eps_(cfg.epsilon),
        m_(n_params, 0.0),
        u_(n_params, 0.0) {}

  long steps() const { return step_; }

  void update(std::span<double> params, std::span<const double> grad) {
    if (params.size() != m_.size() || grad.size() != m_.size())
      throw std::invalid_argument("Optimizer: parameter/gradient size mismatch");
    for (double g : grad)
      if (!std::isfinite(g)) throw std::runtime_error("Optimizer: non-finite gradient");
    ++step_;
    const double bias1 = 1.0 - std::pow(beta1_, step_);
    if (kind_ == OptimizerKind::Adam) {
      const double bias2 = 1.0 - std::pow(beta2_, step_);
      for (std::size_t i = 0; i < m_.size(); ++i) {
        m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
        u_[i] = beta2_ * u_[i] + (1.0 - beta2_) * grad[i] * grad[i];
        const double m_hat = m_[i] / bias1;
        const double u_hat = u_[i] / bias2;
        params[i] += alpha_ * m_hat / (std::sqrt(u_hat) + eps_);
      }
    } else {
      for (std::size_t i = 0; i < m_.size(); ++i) {
        m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
        u_[i] = std::max(beta2_ * u_[i], std::fabs(grad[i]));
        if (u_[i] > 0.0) params[i] += (alpha_ / bias1) * m_[i] / u_[i];
      }
    }
  }

 private:
  OptimizerKind kind_;
  double alpha_, beta1_, beta2_, eps_;
  long step_ = 0;
  std::vector<double> m_, u_;
};

}  // namespace mvrbm
