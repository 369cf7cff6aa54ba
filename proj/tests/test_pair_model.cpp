#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "mvrbm/pair_model.hpp"

using namespace mvrbm;

namespace {

// Brute-force oracle for finite s: correlation <v1 v2> from the joint
// enumeration of (v1, v2, h) with weight omega(s) e^{w sum_i sum_j v_i h_j}.
double correlation_by_enumeration(int s, int n_hidden, double w) {
  const auto levels = level_values(LevelSpec::finite(s));
  std::vector<int> idx(n_hidden, 0);
  double z = 0.0, corr = 0.0;
  for (double v1 : {-1.0, 1.0})
    for (double v2 : {-1.0, 1.0}) {
      std::fill(idx.begin(), idx.end(), 0);
      for (;;) {
        double field = 0.0;
        for (int j = 0; j < n_hidden; ++j) field += levels[idx[j]];
        const double weight = std::exp(w * (v1 + v2) * field);
        z += weight;
        corr += v1 * v2 * weight;
        int j = 0;
        for (; j < n_hidden && ++idx[j] == static_cast<int>(levels.size()); ++j) idx[j] = 0;
        if (j == n_hidden) break;
      }
    }
  return corr / z;
}

const std::vector<LevelSpec> kOrderedSpecs = {LevelSpec::finite(1), LevelSpec::finite(2),
                                              LevelSpec::finite(4), LevelSpec::continuous()};

}  // namespace

TEST_CASE("pair correlation: zero at zero coupling, closed form at s=1") {
  for (const LevelSpec& s : kOrderedSpecs)
    for (int nh : {1, 2, 5}) CHECK(pair_correlation({s, nh, 0.0}, 0.0) == 0.0);

  // s=1, |H|=2: alpha = tanh(ln cosh 2w)
  const PairModelSpec spec{LevelSpec::finite(1), 2, 0.0};
  for (double w = -2.0; w <= 2.0; w += 0.125) {
    CHECK(pair_correlation(spec, w) ==
          Catch::Approx(std::tanh(std::log(std::cosh(2.0 * w)))).margin(1e-12));
  }
  CHECK(pair_correlation(spec, 0.6585) == Catch::Approx(0.6).margin(1e-3));
}

TEST_CASE("pair correlation matches the joint enumeration") {
  for (int s : {1, 2, 3}) {
    for (double w : {0.1, 0.5, 1.3}) {
      INFO("s=" << s << " w=" << w);
      CHECK(pair_correlation({LevelSpec::finite(s), 2, 0.0}, w) ==
            Catch::Approx(correlation_by_enumeration(s, 2, w)).margin(1e-12));
    }
  }
  CHECK(pair_correlation({LevelSpec::finite(2), 3, 0.0}, 0.8) ==
        Catch::Approx(correlation_by_enumeration(2, 3, 0.8)).margin(1e-12));
}

TEST_CASE("pair correlation is even, increasing, and decreasing in s") {
  for (const LevelSpec& s : kOrderedSpecs) {
    const PairModelSpec spec{s, 2, 0.0};
    for (double w = 0.0; w <= 4.0; w += 0.25)
      CHECK(std::fabs(pair_correlation(spec, w) - pair_correlation(spec, -w)) < 1e-12);
    double prev = -1.0;
    for (double w = 0.0; w <= 10.0; w += 0.125) {
      const double a = pair_correlation(spec, w);
      CHECK(a >= 0.0);
      CHECK(a <= 1.0);
      if (w <= 9.0) {  // above this the value saturates to 1 in double
        CHECK(a > prev);
        CHECK(a < 1.0);
      } else {
        CHECK(a >= prev);
      }
      prev = a;
    }
  }
  for (double w : {0.25, 1.0, 3.0}) {
    for (std::size_t i = 1; i < kOrderedSpecs.size(); ++i) {
      INFO("w=" << w << " i=" << i);
      CHECK(pair_correlation({kOrderedSpecs[i - 1], 2, 0.0}, w) >
            pair_correlation({kOrderedSpecs[i], 2, 0.0}, w));
    }
  }
}

TEST_CASE("maximum-likelihood coupling: golden values and round trip") {
  CHECK(max_likelihood_coupling({LevelSpec::finite(1), 2, 0.0}) == 0.0);

  const std::vector<double> golden{0.6585, 0.7834, 0.8941, 1.0887};
  for (std::size_t i = 0; i < kOrderedSpecs.size(); ++i) {
    const PairModelSpec spec{kOrderedSpecs[i], 2, 0.6};
    const double w_star = max_likelihood_coupling(spec);
    INFO("s=" << kOrderedSpecs[i].str());
    CHECK(w_star == Catch::Approx(golden[i]).margin(5e-4));
    CHECK(pair_correlation(spec, w_star) == Catch::Approx(0.6).margin(1e-9));
  }

  PairModelSpec bad{LevelSpec::finite(1), 2, 1.0};
  CHECK_THROWS_AS(max_likelihood_coupling(bad), std::domain_error);
  bad.data_correlation = -0.1;
  CHECK_THROWS_AS(max_likelihood_coupling(bad), std::domain_error);
}

TEST_CASE("couplings at the optimum grow with the level count") {
  for (double beta : {0.2, 0.4, 0.6, 0.8}) {
    double prev = -1.0;
    for (const LevelSpec& s : kOrderedSpecs) {
      const double w = max_likelihood_coupling({s, 2, beta});
      INFO("beta=" << beta << " s=" << s.str());
      CHECK(w > prev);
      prev = w;
    }
  }
}

TEST_CASE("pair log-likelihood: pinned values and global maximum") {
  for (const LevelSpec& s : kOrderedSpecs) {
    CHECK(pair_log_likelihood({s, 2, 0.3}, 0.0) == Catch::Approx(std::log(0.25)).margin(1e-12));
  }
  const double at_optimum = 0.8 * std::log(0.4) + 0.2 * std::log(0.1);
  for (const LevelSpec& s : kOrderedSpecs) {
    const PairModelSpec spec{s, 2, 0.6};
    const double w_star = max_likelihood_coupling(spec);
    const double peak = pair_log_likelihood(spec, w_star);
    CHECK(peak == Catch::Approx(at_optimum).margin(1e-9));
    for (double w = -3.0; w <= 3.0; w += 0.05) CHECK(pair_log_likelihood(spec, w) <= peak + 1e-12);
  }
}

TEST_CASE("the peak sharpens as the level count drops") {
  // second derivative at the maximizer by central differences
  const double h = 1e-4;
  double prev_curvature = -std::numeric_limits<double>::infinity();
  for (const LevelSpec& s : kOrderedSpecs) {
    const PairModelSpec spec{s, 2, 0.6};
    const double w = max_likelihood_coupling(spec);
    const double curv = (pair_log_likelihood(spec, w + h) - 2.0 * pair_log_likelihood(spec, w) +
                         pair_log_likelihood(spec, w - h)) /
                        (h * h);
    INFO("s=" << s.str() << " curvature=" << curv);
    CHECK(curv < 0.0);
    CHECK(curv > prev_curvature);  // less negative as s grows
    prev_curvature = curv;
  }
}
