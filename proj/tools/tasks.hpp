#pragma once

#include <string>

#include "fourmoment/io.hpp"

namespace fourmoment::cli {

struct TaskOutput {
  Json results;
  Json checks;      // name -> bool
  std::string csv;  // empty when the task has no tabular form
};

/// Executes one config-described task. Tasks: spectral, oracle_s4,
/// oracle_consistency, mc_s4, bound, hat_sweep, ledger, clt, tightness.
/// Both the flag-driven subcommands and `run <preset>` funnel through here, so
/// a preset and its equivalent flag invocation produce identical results.
TaskOutput run_task(const Json& cfg);

std::uint64_t seed_of(const Json& cfg);

}  // namespace fourmoment::cli
