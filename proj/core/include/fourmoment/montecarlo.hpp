#pragma once

#include <cstdint>
#include <functional>

#include "fourmoment/observable.hpp"
#include "fourmoment/sampler.hpp"

namespace fourmoment {

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  int reps = 0;
  std::uint64_t seed = 0;
  /// Relative standard error above 0.5: the estimate is noise-dominated and
  /// downstream checks must not treat it as evidence.
  bool underpowered = false;
};

struct McOptions {
  long long n = 0;            // trajectory length per replicate
  int reps = 100;             // independent replicates; >= 100 required
  std::uint64_t seed = 1;     // replicate r uses seed + r
  int threads = 0;            // 0: FOURMOMENT_THREADS env var, default 1
};

/// Monte Carlo E[S_n^4] for the centered observable along sampler paths.
/// Replicates are averaged in fixed (replicate-index) order with Neumaier
/// compensation, so results are bit-identical across thread counts.
McEstimate estimate_s4(const StationarySampler& sampler, const Observable& phi,
                       const McOptions& options);

/// Same, with the centering mean supplied explicitly (e.g. exact stationary
/// mean from an oracle) instead of taken from the observable.
McEstimate estimate_s4(const StationarySampler& sampler, const Observable& phi,
                       double mean, const McOptions& options);

/// Fourth moment of the centered indicator count sum_i (1_{(lo,hi]}(X_i) - p)
/// with p exact from the sampler's stationary CDF.
McEstimate estimate_indicator_s4(const StationarySampler& sampler, double lo,
                                 double hi, const McOptions& options);

/// Indicator variant with explicit cell probability p.
McEstimate estimate_indicator_s4(const StationarySampler& sampler, double lo,
                                 double hi, double p, const McOptions& options);

}  // namespace fourmoment
