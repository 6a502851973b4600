#include "fourmoment/systems.hpp"

#include <algorithm>
#include <cmath>

#include "fourmoment/numeric.hpp"
#include "fourmoment/rng.hpp"
#include "fourmoment/spectral.hpp"

namespace fourmoment {

FiniteMarkovModel doeblin_chain(Eigen::MatrixXd transition,
                                std::optional<Eigen::VectorXd> coords) {
  FiniteMarkovModel model({}, std::move(transition), std::nullopt, std::move(coords));
  model.attach_stationary(stationary(model));  // rejects reducible/periodic chains
  return model;
}

FiniteMarkovModel two_point_flip(double p) {
  if (!(p > 0.0 && p < 1.0)) throw Error("bad_argument", "flip probability must lie in (0,1)");
  Eigen::MatrixXd t(2, 2);
  t << 1.0 - p, p, p, 1.0 - p;
  Eigen::VectorXd coords(2);
  coords << -1.0, 1.0;
  return doeblin_chain(std::move(t), coords);
}

FiniteMarkovModel reflected_walk(int s, double p, double q) {
  if (s < 2) throw Error("bad_argument", "reflected walk needs at least 2 states");
  if (!(p > 0.0 && q > 0.0 && p + q <= 1.0)) {
    throw Error("bad_argument", "reflected walk needs p, q > 0 with p + q <= 1");
  }
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(s, s);
  for (int i = 0; i < s; ++i) {
    const double stay = 1.0 - p - q;
    if (i == 0) {
      t(0, 1) = p + q;  // blocked down-step reflects upward
      t(0, 0) = stay;
    } else if (i == s - 1) {
      t(s - 1, s - 2) = p + q;
      t(s - 1, s - 1) = stay;
    } else {
      t(i, i - 1) = q;
      t(i, i + 1) = p;
      t(i, i) = stay;
    }
  }
  return doeblin_chain(std::move(t));
}

IntervalMap IntervalMap::doubling() { return IntervalMap(Kind::Doubling, 2.0); }

IntervalMap IntervalMap::beta(double beta) {
  if (!(beta > 1.0)) throw Error("bad_argument", "beta map needs beta > 1");
  return IntervalMap(Kind::Beta, beta);
}

IntervalMap IntervalMap::gauss() { return IntervalMap(Kind::Gauss, 0.0); }

std::string IntervalMap::name() const {
  switch (kind_) {
    case Kind::Doubling: return "doubling";
    case Kind::Beta: return "beta(" + std::to_string(parameter_) + ")";
    case Kind::Gauss: return "gauss";
  }
  return "";
}

double IntervalMap::apply(double x) const {
  switch (kind_) {
    case Kind::Doubling: {
      const double y = 2.0 * x;  // exact; the mod-1 subtraction is exact too
      return y >= 1.0 ? y - 1.0 : y;
    }
    case Kind::Beta: {
      const double y = parameter_ * x;
      const double f = y - std::floor(y);
      return f >= 1.0 ? 0.0 : f;
    }
    case Kind::Gauss: {
      if (x <= 0.0) return 0.0;
      const double y = 1.0 / x;
      const double f = y - std::floor(y);
      return f >= 1.0 ? 0.0 : f;
    }
  }
  return 0.0;
}

std::vector<MapBranch> IntervalMap::linear_branches() const {
  if (!piecewise_linear()) {
    throw Error("bad_argument", "the Gauss map has no affine branch decomposition");
  }
  const double slope = kind_ == Kind::Doubling ? 2.0 : parameter_;
  std::vector<MapBranch> out;
  for (int i = 0; static_cast<double>(i) < slope; ++i) {
    MapBranch b;
    b.lo = static_cast<double>(i) / slope;
    b.hi = std::min(static_cast<double>(i + 1) / slope, 1.0);
    b.slope = slope;
    b.intercept = -static_cast<double>(i);
    if (b.hi > b.lo) out.push_back(b);
  }
  return out;
}

double IntervalMap::invariant_density(double x) const {
  switch (kind_) {
    case Kind::Doubling: return (x >= 0.0 && x <= 1.0) ? 1.0 : 0.0;
    case Kind::Gauss:
      return (x >= 0.0 && x <= 1.0) ? 1.0 / ((1.0 + x) * std::log(2.0)) : 0.0;
    case Kind::Beta:
      throw Error("bad_argument",
                  "beta-map invariant density has no closed form here; use the Ulam stationary vector");
  }
  return 0.0;
}

double IntervalMap::invariant_cdf(double t) const {
  switch (kind_) {
    case Kind::Doubling: return std::clamp(t, 0.0, 1.0);
    case Kind::Gauss: return std::log2(1.0 + std::clamp(t, 0.0, 1.0));
    case Kind::Beta:
      throw Error("bad_argument",
                  "beta-map invariant density has no closed form here; use the Ulam stationary vector");
  }
  return 0.0;
}

int default_burn_in(double rate) {
  if (!(rate > 0.0) || rate >= 1.0) return 0;
  return static_cast<int>(std::ceil(std::log(1e-8) / std::log(rate)));
}

namespace {

constexpr double kBitWeight = 0x1.0p-53;

class MapSampler;

class MapCursor final : public TrajectoryCursor {
 public:
  MapCursor(const IntervalMap& map, int burn_in, std::uint64_t seed) : map_(map), rng_(seed) {
    switch (map_.kind()) {
      case IntervalMap::Kind::Doubling:
        x_ = rng_.uniform01();
        break;
      case IntervalMap::Kind::Gauss:
        x_ = std::exp2(rng_.uniform01()) - 1.0;  // inverse CDF of 1/((1+x) ln 2)
        break;
      case IntervalMap::Kind::Beta:
        x_ = rng_.uniform01();
        break;
    }
    for (int i = 0; i < burn_in; ++i) step();
  }

  const SamplerState& next() override {
    if (!first_emitted_) {
      first_emitted_ = true;
    } else {
      step();
    }
    state_ = x_;
    return state_;
  }

 private:
  void step() {
    x_ = map_.apply(x_);
    if (map_.kind() == IntervalMap::Kind::Doubling) {
      // Refresh the exiting mantissa bit; otherwise every double collapses to
      // the fixed point 0 after 53 iterations.
      if (rng_.bit()) {
        x_ += kBitWeight;
        if (x_ >= 1.0) x_ -= kBitWeight;
      }
    }
  }

  IntervalMap map_;
  SplitMix64 rng_;
  double x_ = 0.0;
  bool first_emitted_ = false;
  SamplerState state_ = 0.0;
};

class MapSampler final : public StationarySampler {
 public:
  MapSampler(IntervalMap map, int burn_in) : map_(std::move(map)), burn_in_(burn_in) {}

  std::string descriptor() const override {
    return map_.name() + "(burn_in=" + std::to_string(burn_in_) + ")";
  }
  int burn_in() const override { return burn_in_; }
  std::unique_ptr<TrajectoryCursor> start(std::uint64_t seed) const override {
    return std::make_unique<MapCursor>(map_, burn_in_, seed);
  }
  std::optional<double> stationary_cdf(double t) const override {
    if (map_.kind() == IntervalMap::Kind::Beta) return std::nullopt;
    return map_.invariant_cdf(t);
  }

 private:
  IntervalMap map_;
  int burn_in_;
};

class SubshiftSampler;

class SubshiftCursor final : public TrajectoryCursor {
 public:
  SubshiftCursor(const SubshiftSampler* owner, std::uint64_t seed);
  const SamplerState& next() override;

 private:
  const SubshiftSampler* owner_;
  SplitMix64 rng_;
  SymbolWindow window_;
  bool first_emitted_ = false;
  SamplerState state_;
};

class SubshiftSampler final : public StationarySampler {
 public:
  SubshiftSampler(FiniteMarkovModel chain, int depth)
      : chain_(std::move(chain)), depth_(depth) {
    const Eigen::VectorXd& nu = chain_.stationary();
    initial_ = cumulative(nu);
    for (int i = 0; i < chain_.size(); ++i) {
      rows_.push_back(cumulative(chain_.transition().row(i).transpose()));
    }
  }

  std::string descriptor() const override {
    return "subshift(symbols=" + std::to_string(chain_.size()) +
           ",depth=" + std::to_string(depth_) + ")";
  }
  std::unique_ptr<TrajectoryCursor> start(std::uint64_t seed) const override {
    return std::make_unique<SubshiftCursor>(this, seed);
  }

  int depth() const { return depth_; }
  int draw_initial(double u) const { return pick(initial_, u); }
  int draw_step(int from, double u) const { return pick(rows_[static_cast<std::size_t>(from)], u); }

 private:
  static std::vector<double> cumulative(const Eigen::VectorXd& w) {
    std::vector<double> cum(static_cast<std::size_t>(w.size()));
    double acc = 0.0;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      acc += std::max(0.0, w[i]);
      cum[static_cast<std::size_t>(i)] = acc;
    }
    cum.back() = 1.0 + 1e-9;
    return cum;
  }
  static int pick(const std::vector<double>& cum, double u) {
    const auto it = std::upper_bound(cum.begin(), cum.end(), u);
    return static_cast<int>(it == cum.end() ? cum.size() - 1
                                            : static_cast<std::size_t>(it - cum.begin()));
  }

  FiniteMarkovModel chain_;
  int depth_;
  std::vector<double> initial_;
  std::vector<std::vector<double>> rows_;
};

SubshiftCursor::SubshiftCursor(const SubshiftSampler* owner, std::uint64_t seed)
    : owner_(owner), rng_(seed) {
  window_.reserve(static_cast<std::size_t>(owner_->depth()));
  int sym = owner_->draw_initial(rng_.uniform01());
  window_.push_back(sym);
  for (int i = 1; i < owner_->depth(); ++i) {
    sym = owner_->draw_step(sym, rng_.uniform01());
    window_.push_back(sym);
  }
}

const SamplerState& SubshiftCursor::next() {
  if (!first_emitted_) {
    first_emitted_ = true;
  } else {
    const int last = window_.back();
    window_.erase(window_.begin());
    window_.push_back(owner_->draw_step(last, rng_.uniform01()));
  }
  state_ = window_;
  return state_;
}

class LinearProcessSampler;

class LinearProcessCursor final : public TrajectoryCursor {
 public:
  LinearProcessCursor(const LinearProcessSampler* owner, std::uint64_t seed);
  const SamplerState& next() override;

 private:
  double draw_innovation();

  const LinearProcessSampler* owner_;
  SplitMix64 rng_;
  std::vector<double> ring_;  // ring_[i] = xi_{t-i} after rotation
  bool first_emitted_ = false;
  SamplerState state_ = 0.0;
};

class LinearProcessSampler final : public StationarySampler {
 public:
  explicit LinearProcessSampler(LinearProcessSpec spec) : spec_(spec) {
    if (!(spec_.rho > 0.0 && spec_.rho < 1.0)) {
      throw Error("bad_argument", "linear process needs rho in (0,1)");
    }
    if (!(spec_.truncation_tol > 0.0)) {
      throw Error("bad_argument", "linear process needs a positive truncation tolerance");
    }
    const int length = spec_.geometric_truncation_length();
    coeffs_.resize(static_cast<std::size_t>(length) + 1);
    double c = spec_.scale;
    for (int i = 0; i <= length; ++i) {
      coeffs_[static_cast<std::size_t>(i)] = c;
      c *= spec_.rho;
    }
  }

  std::string descriptor() const override {
    return "linear_process(rho=" + std::to_string(spec_.rho) +
           ",L=" + std::to_string(coeffs_.size() - 1) + ")";
  }
  std::unique_ptr<TrajectoryCursor> start(std::uint64_t seed) const override {
    return std::make_unique<LinearProcessCursor>(this, seed);
  }

  const std::vector<double>& coeffs() const { return coeffs_; }
  const LinearProcessSpec& spec() const { return spec_; }

 private:
  LinearProcessSpec spec_;
  std::vector<double> coeffs_;
};

LinearProcessCursor::LinearProcessCursor(const LinearProcessSampler* owner, std::uint64_t seed)
    : owner_(owner), rng_(seed) {
  // Exact stationary start: pre-draw the whole truncated past.
  ring_.resize(owner_->coeffs().size());
  for (double& xi : ring_) xi = draw_innovation();
}

double LinearProcessCursor::draw_innovation() {
  if (owner_->spec().innovation == LinearProcessSpec::Innovation::Rademacher) {
    return rng_.bit() ? 1.0 : -1.0;
  }
  return 2.0 * rng_.uniform01() - 1.0;
}

const SamplerState& LinearProcessCursor::next() {
  if (!first_emitted_) {
    first_emitted_ = true;
  } else {
    // Shift time forward: newest innovation enters at lag 0.
    std::rotate(ring_.rbegin(), ring_.rbegin() + 1, ring_.rend());
    ring_.front() = draw_innovation();
  }
  const std::vector<double>& c = owner_->coeffs();
  CompensatedSum s;
  for (std::size_t i = 0; i < c.size(); ++i) s.add(c[i] * ring_[i]);
  state_ = s.value();
  return state_;
}

class ScalarIterationSampler;

/// Shared cursor for AR(1) and random-Lipschitz systems: one scalar state,
/// one rng draw per step, burn-in from a fixed start.
class ScalarIterationCursor final : public TrajectoryCursor {
 public:
  ScalarIterationCursor(const ScalarIterationSampler* owner, std::uint64_t seed);
  const SamplerState& next() override;

 private:
  void step();

  const ScalarIterationSampler* owner_;
  SplitMix64 rng_;
  double x_ = 0.0;
  bool first_emitted_ = false;
  SamplerState state_ = 0.0;
};

class ScalarIterationSampler : public StationarySampler {
 public:
  explicit ScalarIterationSampler(int burn_in) : burn_in_(burn_in) {}
  int burn_in() const override { return burn_in_; }
  virtual double advance(double x, SplitMix64& rng) const = 0;

 private:
  int burn_in_;
};

ScalarIterationCursor::ScalarIterationCursor(const ScalarIterationSampler* owner,
                                             std::uint64_t seed)
    : owner_(owner), rng_(seed) {
  for (int i = 0; i < owner_->burn_in(); ++i) step();
}

void ScalarIterationCursor::step() { x_ = owner_->advance(x_, rng_); }

const SamplerState& ScalarIterationCursor::next() {
  if (!first_emitted_) {
    first_emitted_ = true;
  } else {
    step();
  }
  state_ = x_;
  return state_;
}

double draw_noise(const NoiseSpec& noise, SplitMix64& rng) {
  if (noise.kind == NoiseSpec::Kind::Rademacher) {
    return rng.bit() ? noise.half_width : -noise.half_width;
  }
  return noise.half_width * (2.0 * rng.uniform01() - 1.0);
}

class ArSampler final : public ScalarIterationSampler {
 public:
  ArSampler(double rate, NoiseSpec noise, int burn_in)
      : ScalarIterationSampler(burn_in), rate_(rate), noise_(noise) {}

  std::string descriptor() const override {
    return "ar(rate=" + std::to_string(rate_) + ",burn_in=" + std::to_string(burn_in()) + ")";
  }
  std::unique_ptr<TrajectoryCursor> start(std::uint64_t seed) const override {
    return std::make_unique<ScalarIterationCursor>(this, seed);
  }
  double advance(double x, SplitMix64& rng) const override {
    return rate_ * x + draw_noise(noise_, rng);
  }

 private:
  double rate_;
  NoiseSpec noise_;
};

class LipschitzSampler final : public ScalarIterationSampler {
 public:
  LipschitzSampler(std::vector<AffineMap> maps, std::vector<double> weights, int burn_in)
      : ScalarIterationSampler(burn_in), maps_(std::move(maps)) {
    cum_.resize(maps_.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < maps_.size(); ++i) {
      acc += weights[i];
      cum_[i] = acc;
    }
    cum_.back() = 1.0 + 1e-9;
  }

  std::string descriptor() const override {
    return "random_lipschitz(maps=" + std::to_string(maps_.size()) +
           ",burn_in=" + std::to_string(burn_in()) + ")";
  }
  std::unique_ptr<TrajectoryCursor> start(std::uint64_t seed) const override {
    return std::make_unique<ScalarIterationCursor>(this, seed);
  }
  double advance(double x, SplitMix64& rng) const override {
    const double u = rng.uniform01();
    const auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
    const std::size_t idx =
        it == cum_.end() ? cum_.size() - 1 : static_cast<std::size_t>(it - cum_.begin());
    return maps_[idx].slope * x + maps_[idx].intercept;
  }

 private:
  std::vector<AffineMap> maps_;
  std::vector<double> cum_;
};

}  // namespace

std::unique_ptr<StationarySampler> expanding_map(const IntervalMap& map, int burn_in) {
  if (burn_in < 0) {
    burn_in = map.kind() == IntervalMap::Kind::Beta
                  ? default_burn_in(1.0 / map.parameter())
                  : 0;  // doubling and Gauss start from the exact invariant law
  }
  return std::make_unique<MapSampler>(map, burn_in);
}

std::unique_ptr<StationarySampler> subshift(const Eigen::MatrixXd& allowed,
                                            FiniteMarkovModel symbol_chain, int window_depth) {
  if (window_depth < 1) throw Error("bad_argument", "window depth must be >= 1");
  const int s = symbol_chain.size();
  if (allowed.rows() != s || allowed.cols() != s) {
    throw Error("bad_argument", "allowed-pair matrix does not match the symbol chain");
  }
  for (int i = 0; i < s; ++i) {
    for (int j = 0; j < s; ++j) {
      if (symbol_chain.transition()(i, j) > 0.0 && allowed(i, j) < 0.5) {
        throw Error("bad_argument", "probability mass on forbidden pair (" + std::to_string(i) +
                                        "," + std::to_string(j) + ")");
      }
    }
  }
  symbol_chain.stationary();  // required for the stationary start
  return std::make_unique<SubshiftSampler>(std::move(symbol_chain), window_depth);
}

int LinearProcessSpec::geometric_truncation_length() const {
  // smallest L with |scale| * rho^{L+1} / (1-rho) < truncation_tol
  double tail = std::abs(scale) * rho / (1.0 - rho);
  int length = 0;
  while (tail >= truncation_tol && length < 1 << 20) {
    tail *= rho;
    ++length;
  }
  return length;
}

std::unique_ptr<StationarySampler> linear_process(LinearProcessSpec spec) {
  return std::make_unique<LinearProcessSampler>(spec);
}

std::unique_ptr<StationarySampler> ar_model(double rate, NoiseSpec noise, int burn_in) {
  if (!(std::abs(rate) < 1.0)) {
    throw Error("bad_argument", "AR model is not contracting: |rate| = " + std::to_string(std::abs(rate)));
  }
  if (!(noise.half_width > 0.0)) throw Error("bad_argument", "noise half-width must be positive");
  if (burn_in < 0) burn_in = default_burn_in(std::abs(rate));
  return std::make_unique<ArSampler>(rate, noise, burn_in);
}

std::unique_ptr<StationarySampler> random_lipschitz(std::vector<AffineMap> maps,
                                                    std::vector<double> weights, int burn_in) {
  if (maps.empty()) throw Error("bad_argument", "random_lipschitz needs at least one map");
  if (weights.empty()) {
    weights.assign(maps.size(), 1.0 / static_cast<double>(maps.size()));
  }
  if (weights.size() != maps.size()) {
    throw Error("bad_argument", "weights do not match the map count");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw Error("bad_argument", "weights must be nonnegative");
    total += w;
  }
  if (!(total > 0.0)) throw Error("bad_argument", "weights must have positive mass");
  for (double& w : weights) w /= total;

  double mean_rate = 0.0;
  for (std::size_t i = 0; i < maps.size(); ++i) mean_rate += weights[i] * std::abs(maps[i].slope);
  if (mean_rate >= 1.0) {
    throw Error("bad_argument",
                "not contracting on average: measured rate " + std::to_string(mean_rate));
  }
  if (burn_in < 0) burn_in = default_burn_in(mean_rate);
  return std::make_unique<LipschitzSampler>(std::move(maps), std::move(weights), burn_in);
}

}  // namespace fourmoment
