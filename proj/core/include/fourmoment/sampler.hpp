#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "fourmoment/model.hpp"
#include "fourmoment/observable.hpp"
#include "fourmoment/rng.hpp"

namespace fourmoment {

/// One replicate's trajectory X_1, X_2, ... after the stationary start or
/// burn-in that the owning sampler applies inside start().
class TrajectoryCursor {
 public:
  virtual ~TrajectoryCursor() = default;
  virtual const SamplerState& next() = 0;
};

/// Seeded source of stationary trajectories. start(seed) is a pure function of
/// the seed: identical (seed, n) yields a bit-identical trajectory prefix.
class StationarySampler {
 public:
  virtual ~StationarySampler() = default;
  virtual std::string descriptor() const = 0;
  /// Steps discarded before emission (0 when the stationary law is sampled
  /// exactly at the start).
  virtual int burn_in() const { return 0; }
  virtual std::unique_ptr<TrajectoryCursor> start(std::uint64_t seed) const = 0;
  /// CDF of the stationary law of the emitted scalar, when known in closed
  /// form. Required by indicator-moment estimation.
  virtual std::optional<double> stationary_cdf(double t) const {
    (void)t;
    return std::nullopt;
  }
};

/// Wrap a finite model (stationary vector required) as a sampler. Emits the
/// state *index* as a double (exact for any state count in play); observables
/// evaluated along such paths must carry per-state values, i.e. analytic
/// observables go through Observable::discretized first. stationary_cdf is the
/// index-space CDF, so interval indicators select state sets.
std::unique_ptr<StationarySampler> model_sampler(FiniteMarkovModel model);

/// I.i.d. uniform draws on [0,1).
std::unique_ptr<StationarySampler> iid_uniform_sampler();

}  // namespace fourmoment
