#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace fourmoment {

/// Neumaier-compensated accumulator. The bit pattern of value() is a function
/// of the exact sequence of add() calls, so every summation in the library
/// fixes its iteration order and becomes reproducible across runs.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }

  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// x^n by repeated multiplication (n >= 0). Used instead of std::pow for small
/// integer exponents so that scaling by powers of two factors out exactly.
inline double pow_int(double x, int n) noexcept {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

/// theta^n via the same repeated product everywhere (certificate validation and
/// ledger bounds must round identically).
inline double theta_pow(double theta, int n) noexcept { return pow_int(theta, n); }

/// S^(1/q). Uses sqrt chains for q in {1,2,4} so that power-of-two scalings of
/// S pass through exactly; falls back to std::pow otherwise.
inline double root_q(double s, double q) noexcept {
  if (q == 1.0) return s;
  if (q == 2.0) return std::sqrt(s);
  if (q == 4.0) return std::sqrt(std::sqrt(s));
  return std::pow(s, 1.0 / q);
}

struct SampleMoments {
  double mean = 0.0;
  double variance = 0.0;  // unbiased (divides by n-1)
  double skewness = 0.0;
  double kurtosis = 0.0;  // raw kurtosis m4/m2^2 (3 for a normal law)
};

/// Two-pass central moments in index order.
SampleMoments sample_moments(std::span<const double> xs);

/// Standard normal CDF.
inline double normal_cdf(double z) noexcept { return 0.5 * std::erfc(-z * (1.0 / std::sqrt(2.0))); }

/// Kolmogorov-Smirnov sup-distance between the empirical law of `zs` and the
/// standard normal. Sorts a copy.
double ks_distance_to_normal(std::vector<double> zs);

}  // namespace fourmoment
