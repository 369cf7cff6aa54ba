#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "mvrbm/optim.hpp"
#include "mvrbm/rng.hpp"

using namespace mvrbm;

namespace {

TrainConfig config(OptimizerKind kind) {
  TrainConfig cfg;
  cfg.optimizer = kind;
  return cfg;
}

}  // namespace

TEST_CASE("train config validation") {
  TrainConfig cfg;
  cfg.epochs = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.epochs = 1;
  cfg.cd_k = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.cd_k = 1;
  cfg.batch_size = -1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.batch_size = 0;
  cfg.beta1 = 1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.beta1 = 0.9;
  CHECK_NOTHROW(cfg.validate());
  CHECK(parse_optimizer("adam") == OptimizerKind::Adam);
  CHECK(parse_optimizer("adamax") == OptimizerKind::AdaMax);
  CHECK_THROWS_AS(parse_optimizer("sgd"), std::invalid_argument);
}

TEST_CASE("first adam step moves by ~alpha in the gradient direction") {
  for (double g : {0.5, -2.0, 1e-3}) {
    Optimizer opt(config(OptimizerKind::Adam), 1);
    std::vector<double> params{1.0};
    opt.update(params, std::vector{g});
    const double expected = 0.001 * g / (std::fabs(g) + 1e-8);
    CHECK(params[0] - 1.0 == Catch::Approx(expected).margin(1e-12));
  }
}

TEST_CASE("zero gradient leaves parameters untouched") {
  for (OptimizerKind kind : {OptimizerKind::Adam, OptimizerKind::AdaMax}) {
    Optimizer opt(config(kind), 3);
    std::vector<double> params{1.0, -2.0, 0.5};
    const std::vector<double> zero{0.0, 0.0, 0.0};
    for (int t = 0; t < 50; ++t) opt.update(params, zero);
    CHECK(params == std::vector{1.0, -2.0, 0.5});
  }
}

TEST_CASE("adamax second moment is a running max") {
  Optimizer opt(config(OptimizerKind::AdaMax), 1);
  std::vector<double> params{0.0};
  const double g = 0.7;
  double prev = 0.0;
  for (int t = 1; t <= 5; ++t) {
    opt.update(params, std::vector{g});
    // u = g after the first step and stays g, so the step is
    // alpha/(1-beta1^t) * m/g with m = (1-beta1^t) g; i.e. exactly alpha
    const double step = params[0] - prev;
    CHECK(step == Catch::Approx(0.001).margin(1e-15));
    prev = params[0];
  }
}

TEST_CASE("non-finite gradient aborts without touching state") {
  Optimizer opt(config(OptimizerKind::Adam), 2);
  std::vector<double> params{1.0, 1.0};
  opt.update(params, std::vector{0.5, 0.5});
  const std::vector<double> after_one = params;
  const long steps = opt.steps();
  CHECK_THROWS_AS(opt.update(params, std::vector{0.5, std::nan("")}), std::runtime_error);
  CHECK(params == after_one);
  CHECK(opt.steps() == steps);
  // the optimizer keeps working after the rejected update
  CHECK_NOTHROW(opt.update(params, std::vector{0.5, 0.5}));
  CHECK(opt.steps() == steps + 1);
}

TEST_CASE("per-step displacement bounds") {
  // Adam: |step| <= alpha sqrt((1-b1)/(1-b2)) sqrt(1-b2^t)/(1-b1^t)
  // AdaMax: |step| <= alpha (1-b1)/((1-b1/b2)(1-b1^t))
  RngStream rng(33);
  for (OptimizerKind kind : {OptimizerKind::Adam, OptimizerKind::AdaMax}) {
    const TrainConfig cfg = config(kind);
    Optimizer opt(cfg, 4);
    std::vector<double> params(4, 0.0), prev(4, 0.0), grad(4);
    for (int t = 1; t <= 200; ++t) {
      for (double& g : grad) g = rng.gaussian(0.0, 2.0);
      opt.update(params, grad);
      const double bias1 = 1.0 - std::pow(cfg.beta1, t);
      double bound;
      if (kind == OptimizerKind::Adam) {
        bound = cfg.alpha * std::sqrt((1.0 - cfg.beta1) / (1.0 - cfg.beta2)) *
                std::sqrt(1.0 - std::pow(cfg.beta2, t)) / bias1;
      } else {
        bound = cfg.alpha * (1.0 - cfg.beta1) / ((1.0 - cfg.beta1 / cfg.beta2) * bias1);
      }
      for (int i = 0; i < 4; ++i) {
        CHECK(std::fabs(params[i] - prev[i]) <= bound * (1.0 + 1e-12));
        prev[i] = params[i];
      }
    }
  }
}
