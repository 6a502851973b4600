#include "fourmoment/montecarlo.hpp"

#include <cmath>
#include <cstdlib>
#include <thread>
#include <variant>
#include <vector>

#include "fourmoment/model.hpp"
#include "fourmoment/numeric.hpp"
#include "fourmoment/rng.hpp"

namespace fourmoment {

namespace {

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("FOURMOMENT_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  return 1;
}

double scalar_state(const SamplerState& state) {
  if (const double* x = std::get_if<double>(&state)) return *x;
  throw Error("bad_argument", "indicator sampling needs scalar sampler states");
}

/// Runs every replicate through `step_value`, accumulates S_n with Neumaier
/// compensation, stores S_n^4 per replicate index, then reduces the replicate
/// array in fixed order. The partition over threads is static by block, so
/// replicate r always uses seed + r and lands in slot r: thread count cannot
/// change a single bit of the result.
template <typename StepValue>
McEstimate run_replicates(const StationarySampler& sampler, StepValue&& step_value,
                          const McOptions& options) {
  if (options.reps < 100) throw Error("bad_argument", "Monte Carlo needs reps >= 100");
  if (options.n < 1) throw Error("bad_argument", "Monte Carlo needs n >= 1");
  const int reps = options.reps;
  std::vector<double> fourth(static_cast<std::size_t>(reps), 0.0);

  auto block = [&](int lo, int hi) {
    for (int r = lo; r < hi; ++r) {
      auto cursor = sampler.start(replicate_seed(options.seed, r));
      CompensatedSum s;
      for (long long t = 0; t < options.n; ++t) s.add(step_value(cursor->next()));
      const double v = s.value();
      const double v2 = v * v;
      fourth[static_cast<std::size_t>(r)] = v2 * v2;
    }
  };

  const int threads = std::min(resolve_threads(options.threads), reps);
  if (threads <= 1) {
    block(0, reps);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    const int chunk = (reps + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const int lo = t * chunk;
      const int hi = std::min(reps, lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back(block, lo, hi);
    }
    for (auto& th : pool) th.join();
  }

  const SampleMoments stats = sample_moments(fourth);
  McEstimate out;
  out.mean = stats.mean;
  out.std_error = std::sqrt(std::max(stats.variance, 0.0) / reps);
  out.reps = reps;
  out.seed = options.seed;
  out.underpowered = out.std_error > 0.5 * std::abs(out.mean);
  return out;
}

}  // namespace

McEstimate estimate_s4(const StationarySampler& sampler, const Observable& phi,
                       const McOptions& options) {
  return estimate_s4(sampler, phi, 0.0, options);
}

McEstimate estimate_s4(const StationarySampler& sampler, const Observable& phi,
                       double mean, const McOptions& options) {
  return run_replicates(
      sampler, [&phi, mean](const SamplerState& state) { return phi.eval(state) - mean; },
      options);
}

McEstimate estimate_indicator_s4(const StationarySampler& sampler, double lo, double hi,
                                 const McOptions& options) {
  const auto chi = sampler.stationary_cdf(hi);
  const auto clo = sampler.stationary_cdf(lo);
  if (!chi || !clo) {
    throw Error("bad_argument",
                "sampler has no closed-form stationary CDF; pass the cell probability");
  }
  return estimate_indicator_s4(sampler, lo, hi, *chi - *clo, options);
}

McEstimate estimate_indicator_s4(const StationarySampler& sampler, double lo, double hi,
                                 double p, const McOptions& options) {
  if (!(hi > lo)) throw Error("bad_argument", "indicator cell needs hi > lo");
  if (!(p >= 0.0 && p <= 1.0)) throw Error("bad_argument", "cell probability must be in [0,1]");
  return run_replicates(
      sampler,
      [lo, hi, p](const SamplerState& state) {
        const double x = scalar_state(state);
        return (x > lo && x <= hi ? 1.0 : 0.0) - p;
      },
      options);
}

}  // namespace fourmoment
