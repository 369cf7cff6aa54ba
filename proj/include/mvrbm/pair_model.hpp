#pragma once

#include <cmath>
#include <stdexcept>

#include "mvrbm/levels.hpp"

namespace mvrbm {

/// Two-visible RBM with a single shared coupling w and |H| hidden units,
/// fit to data with zero single-site means and visible-pair correlation
/// `data_correlation` (in [0, 1)).
struct PairModelSpec {
  LevelSpec levels;
  int n_hidden = 2;
  double data_correlation = 0.0;

  void validate() const {
    if (n_hidden < 1) throw std::invalid_argument("PairModelSpec: n_hidden must be >= 1");
    if (!(data_correlation >= 0.0 && data_correlation < 1.0))
      throw std::domain_error("PairModelSpec: data correlation must lie in [0, 1)");
  }
};

/// Model correlation <v1 v2> as a function of the coupling, in tanh form:
/// tanh(|H| (ln phi(2w) - ln 2) / 2). Even in w, in [0, 1), strictly
/// increasing for w >= 0, and immune to overflow at large |H| or w.
inline double pair_correlation(const PairModelSpec& spec, double w) {
  return std::tanh(0.5 * spec.n_hidden * (log_unit_partition(spec.levels, 2.0 * w) - kLn2));
}

/// The unique w >= 0 whose model correlation equals the data correlation
/// (the global maximizer of the pair-model log-likelihood). Bisection on
/// [0, 64]; the correlation at 64 is within 1e-15 of 1, so every admissible
/// target is bracketed.
inline double max_likelihood_coupling(const PairModelSpec& spec) {
  spec.validate();
  const double target = spec.data_correlation;
  if (target == 0.0) return 0.0;
  double lo = 0.0, hi = 64.0;
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    (pair_correlation(spec, mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Mean data log-likelihood of the pair model at coupling w:
/// sum over the four visible states of q(v1,v2) ln p(v1,v2 | w) with both
/// distributions in their correlation-expanded form.
inline double pair_log_likelihood(const PairModelSpec& spec, double w) {
  spec.validate();
  const double beta = spec.data_correlation;
  const double alpha = pair_correlation(spec, w);
  double acc = 0.0;
  for (const double prod : {1.0, -1.0}) {  // v1*v2; each value covers two states
    acc += 2.0 * ((1.0 + beta * prod) / 4.0) * std::log((1.0 + alpha * prod) / 4.0);
  }
  return acc;
}

}  // namespace mvrbm
