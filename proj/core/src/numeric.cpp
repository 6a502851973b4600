#include "fourmoment/numeric.hpp"

#include <algorithm>

namespace fourmoment {

SampleMoments sample_moments(std::span<const double> xs) {
  SampleMoments out;
  const std::size_t n = xs.size();
  if (n == 0) return out;

  CompensatedSum s1;
  for (double x : xs) s1.add(x);
  out.mean = s1.value() / static_cast<double>(n);

  if (n < 2) return out;

  CompensatedSum s2, s3, s4;
  for (double x : xs) {
    const double d = x - out.mean;
    const double d2 = d * d;
    s2.add(d2);
    s3.add(d2 * d);
    s4.add(d2 * d2);
  }
  const double nn = static_cast<double>(n);
  const double m2 = s2.value() / nn;
  const double m3 = s3.value() / nn;
  const double m4 = s4.value() / nn;
  out.variance = s2.value() / (nn - 1.0);
  if (m2 > 0.0) {
    out.skewness = m3 / (m2 * std::sqrt(m2));
    out.kurtosis = m4 / (m2 * m2);
  }
  return out;
}

double ks_distance_to_normal(std::vector<double> zs) {
  const std::size_t n = zs.size();
  if (n == 0) return 0.0;
  std::sort(zs.begin(), zs.end());
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = normal_cdf(zs[i]);
    const double lo = static_cast<double>(i) / static_cast<double>(n);
    const double hi = static_cast<double>(i + 1) / static_cast<double>(n);
    d = std::max(d, std::max(f - lo, hi - f));
  }
  return d;
}

}  // namespace fourmoment
