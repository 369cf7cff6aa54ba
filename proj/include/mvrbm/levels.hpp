#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace mvrbm {

inline constexpr double kLn2 = 0.6931471805599453094;

/// Hidden-unit level grid. A finite level count `s` induces the s+1 evenly
/// spaced values {(2k-s)/s : k=0..s} on [-1,+1]; the continuous spec is the
/// s -> infinity limit where the unit ranges over the whole interval.
class LevelSpec {
 public:
  LevelSpec() : s_(1) {}

  static LevelSpec finite(int s) {
    if (s < 1) throw std::invalid_argument("LevelSpec: s must be >= 1");
    return LevelSpec(s);
  }
  static LevelSpec continuous() { return LevelSpec(kContinuous); }

  bool is_continuous() const { return s_ == kContinuous; }

  /// Partition count s; only meaningful for finite specs.
  int s() const {
    if (is_continuous())
      throw std::logic_error("LevelSpec: continuous spec has no finite s");
    return s_;
  }

  int level_count() const { return s() + 1; }

  /// Second moment of a unit under the uniform distribution over its levels:
  /// (s+2)/(3s) for finite s, 1/3 in the continuous limit.
  double uniform_second_moment() const {
    if (is_continuous()) return 1.0 / 3.0;
    return (s_ + 2.0) / (3.0 * s_);
  }

  /// "1", "2", ... or "inf" (the token used in configs and model files).
  std::string str() const { return is_continuous() ? "inf" : std::to_string(s_); }

  static LevelSpec parse(const std::string& token) {
    if (token == "inf") return continuous();
    std::size_t pos = 0;
    int s = 0;
    try {
      s = std::stoi(token, &pos);
    } catch (const std::exception&) {
      throw std::invalid_argument("LevelSpec: cannot parse \"" + token + "\"");
    }
    if (pos != token.size())
      throw std::invalid_argument("LevelSpec: cannot parse \"" + token + "\"");
    return finite(s);
  }

  friend bool operator==(const LevelSpec& a, const LevelSpec& b) { return a.s_ == b.s_; }
  friend bool operator!=(const LevelSpec& a, const LevelSpec& b) { return a.s_ != b.s_; }

 private:
  explicit LevelSpec(int s) : s_(s) {}
  static constexpr int kContinuous = 0;
  int s_;
};

/// The values a finite-level hidden unit can take, in increasing order.
/// First is exactly -1, last exactly +1.
inline std::vector<double> level_values(const LevelSpec& levels) {
  if (levels.is_continuous())
    throw std::invalid_argument("continuous space has no finite enumeration");
  const int s = levels.s();
  std::vector<double> values(s + 1);
  for (int k = 0; k <= s; ++k) values[k] = (2.0 * k - s) / s;
  return values;
}

namespace detail {

/// ln sinh(a) for a > 0 without overflow: sinh overflows near a ~ 710, so for
/// large a use a - ln2 + ln(1 - e^{-2a}).
inline double log_sinh(double a) {
  if (a < 1.0) return std::log(std::sinh(a));
  return a - kLn2 + std::log1p(-std::exp(-2.0 * a));
}

// Below this the closed forms are 0/0; the quadratic/linear Taylor terms are
// accurate to ~1e-17 here.
inline constexpr double kTaylorWindow = 1e-4;

}  // namespace detail

/// ln of the single-unit partition factor
///   phi_s(x)   = (2/(s+1)) sum_h e^{xh}  = 2 sinh((s+1)x/s) / ((s+1) sinh(x/s))
///   phi_inf(x) = int_{-1}^{+1} e^{xh} dh = 2 sinh(x) / x.
/// Even in x, finite for all finite x, phi(0) = 2.
inline double log_unit_partition(const LevelSpec& levels, double x) {
  if (!std::isfinite(x)) throw std::domain_error("log_unit_partition: non-finite argument");
  const double a = std::fabs(x);
  if (a < detail::kTaylorWindow)
    return kLn2 + 0.5 * levels.uniform_second_moment() * a * a;
  if (levels.is_continuous()) return kLn2 + detail::log_sinh(a) - std::log(a);
  const double s = levels.s();
  return kLn2 + detail::log_sinh((s + 1.0) * a / s) - std::log(s + 1.0) -
         detail::log_sinh(a / s);
}

/// Mean of a hidden unit under the conditional p(h) ~ e^{xh} over its levels;
/// equals d/dx ln phi_s(x):
///   psi_s(x)   = (s+1)/(s tanh((s+1)x/s)) - 1/(s tanh(x/s))
///   psi_inf(x) = 1/tanh(x) - 1/x.
/// Odd in x, strictly increasing, |psi| < 1 for finite x.
inline double unit_mean(const LevelSpec& levels, double x) {
  if (!std::isfinite(x)) throw std::domain_error("unit_mean: non-finite argument");
  const double a = std::fabs(x);
  double r;
  if (a < detail::kTaylorWindow) {
    r = levels.uniform_second_moment() * a;
  } else if (levels.is_continuous()) {
    r = 1.0 / std::tanh(a) - 1.0 / a;
  } else {
    const double s = levels.s();
    r = ((s + 1.0) / std::tanh((s + 1.0) * a / s) - 1.0 / std::tanh(a / s)) / s;
  }
  return x < 0.0 ? -r : r;
}

}  // namespace mvrbm
