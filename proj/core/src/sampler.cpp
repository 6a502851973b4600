#include "fourmoment/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace fourmoment {

namespace {

/// Index drawn from a cumulative row by inverse transform; the final cumulant
/// is forced to 1 at construction so u ~ U[0,1) always lands.
int draw_from_cumulative(const std::vector<double>& cum, double u) {
  const auto it = std::upper_bound(cum.begin(), cum.end(), u);
  const auto idx = it == cum.end() ? cum.size() - 1 : static_cast<std::size_t>(it - cum.begin());
  return static_cast<int>(idx);
}

std::vector<double> cumulative(const Eigen::VectorXd& weights) {
  std::vector<double> cum(static_cast<std::size_t>(weights.size()));
  double acc = 0.0;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    acc += std::max(0.0, weights[i]);
    cum[static_cast<std::size_t>(i)] = acc;
  }
  cum.back() = 1.0 + 1e-9;  // guard against rounding shortfall
  return cum;
}

class ModelSampler;

class ModelCursor final : public TrajectoryCursor {
 public:
  ModelCursor(const ModelSampler* owner, std::uint64_t seed) : owner_(owner), rng_(seed) {}
  const SamplerState& next() override;

 private:
  const ModelSampler* owner_;
  SplitMix64 rng_;
  int current_ = -1;  // -1: initial stationary draw pending
  SamplerState state_ = 0.0;
};

class ModelSampler final : public StationarySampler {
 public:
  explicit ModelSampler(FiniteMarkovModel model) : model_(std::move(model)) {
    const Eigen::VectorXd& nu = model_.stationary();  // throws without one
    initial_ = cumulative(nu);
    const int s = model_.size();
    rows_.reserve(static_cast<std::size_t>(s));
    for (int i = 0; i < s; ++i) {
      rows_.push_back(cumulative(model_.transition().row(i).transpose()));
    }
  }

  std::string descriptor() const override {
    return "markov(states=" + std::to_string(model_.size()) + ")";
  }

  std::unique_ptr<TrajectoryCursor> start(std::uint64_t seed) const override {
    return std::make_unique<ModelCursor>(this, seed);
  }

  std::optional<double> stationary_cdf(double t) const override {
    const Eigen::VectorXd& nu = model_.stationary();
    double acc = 0.0;
    for (Eigen::Index i = 0; i < nu.size(); ++i) {
      if (static_cast<double>(i) <= t) acc += nu[i];
    }
    return acc;
  }

  int draw_initial(double u) const { return draw_from_cumulative(initial_, u); }
  int draw_step(int from, double u) const {
    return draw_from_cumulative(rows_[static_cast<std::size_t>(from)], u);
  }

 private:
  FiniteMarkovModel model_;
  std::vector<double> initial_;
  std::vector<std::vector<double>> rows_;
};

const SamplerState& ModelCursor::next() {
  const double u = rng_.uniform01();
  current_ = current_ < 0 ? owner_->draw_initial(u) : owner_->draw_step(current_, u);
  state_ = static_cast<double>(current_);
  return state_;
}

class UniformCursor final : public TrajectoryCursor {
 public:
  explicit UniformCursor(std::uint64_t seed) : rng_(seed) {}
  const SamplerState& next() override {
    state_ = rng_.uniform01();
    return state_;
  }

 private:
  SplitMix64 rng_;
  SamplerState state_ = 0.0;
};

class UniformSampler final : public StationarySampler {
 public:
  std::string descriptor() const override { return "iid_uniform"; }
  std::unique_ptr<TrajectoryCursor> start(std::uint64_t seed) const override {
    return std::make_unique<UniformCursor>(seed);
  }
  std::optional<double> stationary_cdf(double t) const override {
    return std::clamp(t, 0.0, 1.0);
  }
};

}  // namespace

std::unique_ptr<StationarySampler> model_sampler(FiniteMarkovModel model) {
  return std::make_unique<ModelSampler>(std::move(model));
}

std::unique_ptr<StationarySampler> iid_uniform_sampler() {
  return std::make_unique<UniformSampler>();
}

}  // namespace fourmoment
