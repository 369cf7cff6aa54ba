#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "mvrbm/drbm.hpp"
#include "mvrbm/rbm.hpp"

namespace mvrbm {

/// Kullback-Leibler divergence from `gen` to `trained` over the visible
/// marginals, divided by |V|. Exact (enumerates visible states); the models
/// may differ in hidden size and level count, only |V| must agree.
inline double kld_per_visible(const RbmParams& gen, const RbmParams& trained) {
  detail::require(gen.n_visible() == trained.n_visible(), "kld_per_visible: |V| mismatch");
  detail::check_enumerable(gen, "kld_per_visible");
  const double log_z_gen = exact_log_partition(gen);
  const double log_z_tr = exact_log_partition(trained);
  const std::uint32_t n_states = 1u << gen.n_visible();
  std::vector<double> v(gen.n_visible());
  double acc = 0.0;
  for (std::uint32_t m = 0; m < n_states; ++m) {
    detail::spin_state(m, v);
    const double lp_gen = unnormalized_log_marginal(gen, v) - log_z_gen;
    const double lp_tr = unnormalized_log_marginal(trained, v) - log_z_tr;
    acc += std::exp(lp_gen) * (lp_gen - lp_tr);
  }
  return acc / gen.n_visible();
}

/// Fraction of points whose predicted class differs from the label; an exact
/// rational count over the dataset.
inline double misclassification_rate(const DrbmParams& p, const LabeledDataset& data) {
  detail::require(data.n_points() >= 1, "misclassification_rate: empty dataset");
  long wrong = 0;
  for (int i = 0; i < data.n_points(); ++i)
    if (predict_class(p, data.input(i)) != data.label(i)) ++wrong;
  return static_cast<double>(wrong) / data.n_points();
}

/// One logged scalar: (epoch, metric name, value) plus the run seed and a
/// fingerprint of the configuration that produced it.
struct MetricsRecord {
  int epoch = 0;
  std::string metric;
  double value = 0.0;
  std::uint64_t seed = 0;
  std::string config_id;
};

/// FNV-1a 64 of a canonical configuration dump, as 16 hex digits.
inline std::string fingerprint_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace mvrbm
