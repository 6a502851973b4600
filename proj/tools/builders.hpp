#pragma once

#include <memory>
#include <optional>
#include <string>

#include "fourmoment/io.hpp"
#include "fourmoment/sampler.hpp"
#include "fourmoment/systems.hpp"

namespace fourmoment::cli {

/// A system built from config JSON: always a sampler, plus the finite model
/// when the kind is (or discretizes to) one.
struct SystemBundle {
  std::string kind;
  std::optional<FiniteMarkovModel> model;
  std::unique_ptr<StationarySampler> sampler;
};

/// kinds: finite_markov (default when "transition" present), two_point_flip,
/// reflected_walk, ulam, doubling, beta, gauss, subshift, linear_process, ar,
/// random_lipschitz, iid_uniform.
SystemBundle build_system(const Json& j);

/// kinds: values, coordinate, hat, indicator.
Observable build_observable(const Json& j);

IntervalMap build_map(const Json& j);

const FiniteMarkovModel& require_model(const SystemBundle& bundle);

}  // namespace fourmoment::cli
