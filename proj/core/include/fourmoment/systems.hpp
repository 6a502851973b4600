#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fourmoment/model.hpp"
#include "fourmoment/observable.hpp"
#include "fourmoment/sampler.hpp"

namespace fourmoment {

/// Finite uniformly ergodic chain: validates irreducibility and aperiodicity,
/// solves for the exact stationary vector, and attaches it. The sup norm makes
/// the embedding and algebra constants both 1.
FiniteMarkovModel doeblin_chain(Eigen::MatrixXd transition,
                                std::optional<Eigen::VectorXd> coords = std::nullopt);

/// Symmetric +/-1 flip chain: stay 1-p / flip p, coords (-1, +1).
FiniteMarkovModel two_point_flip(double p);

/// Birth-death walk on {0..s-1}: interior rows (q, 1-p-q, p); a blocked step
/// at either end reflects onto the inward neighbor.
FiniteMarkovModel reflected_walk(int s, double p, double q);

/// One monotone affine piece x -> slope * x + intercept on [lo, hi).
struct MapBranch {
  double lo = 0.0;
  double hi = 0.0;
  double slope = 0.0;
  double intercept = 0.0;
};

/// Piecewise expanding self-map of [0,1] with full affine branch data when the
/// map is piecewise linear (doubling, beta); the Gauss map exposes its formula
/// only through apply().
class IntervalMap {
 public:
  enum class Kind { Doubling, Beta, Gauss };

  static IntervalMap doubling();
  static IntervalMap beta(double beta);  // beta > 1 required
  static IntervalMap gauss();

  Kind kind() const { return kind_; }
  double parameter() const { return parameter_; }
  std::string name() const;
  double apply(double x) const;
  bool piecewise_linear() const { return kind_ != Kind::Gauss; }
  /// Affine branches covering [0,1); throws bad_argument for the Gauss map.
  std::vector<MapBranch> linear_branches() const;
  /// Closed-form invariant density: Lebesgue for doubling, 1/((1+x) ln 2) for
  /// Gauss. The beta map has no closed form here — use the Ulam stationary
  /// vector; asking for it throws bad_argument.
  double invariant_density(double x) const;
  double invariant_cdf(double t) const;

 private:
  IntervalMap(Kind kind, double parameter) : kind_(kind), parameter_(parameter) {}
  Kind kind_;
  double parameter_;
};

/// Sampler iterating the map. Doubling and Gauss start from their exact
/// invariant law (no burn-in); the beta map starts uniform and burns in.
/// burn_in < 0 picks the default: 0 for exact starts, the geometric-mixing
/// default at rate 1/beta otherwise. The doubling map injects one fresh
/// uniform bit per step at weight 2^-53 so floating-point orbits do not
/// collapse to the fixed point.
std::unique_ptr<StationarySampler> expanding_map(const IntervalMap& map,
                                                 int burn_in = -1);

/// Finite-alphabet subshift: symbol chain constrained to the allowed pairs
/// (allowed(i,j) = 0 forbids mass at transition i -> j), emitting the forward
/// window (x_t, ..., x_{t+depth-1}) truncated at `window_depth`. Observables
/// read only the window; with the word metric 2^-k the truncation error of a
/// Lipschitz observable is at most Lip * 2^-depth.
std::unique_ptr<StationarySampler> subshift(const Eigen::MatrixXd& allowed,
                                            FiniteMarkovModel symbol_chain,
                                            int window_depth = 48);

/// Causal linear process X_t = sum_{k>=0} c_k xi_{t-k} with c_k = scale*rho^k
/// and bounded i.i.d. innovations, truncated at the smallest L whose declared
/// tail bound scale * rho^{L+1} / (1-rho) drops below truncation_tol.
struct LinearProcessSpec {
  double rho = 0.5;
  double scale = 1.0;
  enum class Innovation { Rademacher, Uniform } innovation = Innovation::Rademacher;
  double truncation_tol = 1e-10;
  int geometric_truncation_length() const;
};

std::unique_ptr<StationarySampler> linear_process(LinearProcessSpec spec);

/// Bounded i.i.d. innovation law: Uniform on [-half_width, half_width] or
/// Rademacher on {-half_width, +half_width}.
struct NoiseSpec {
  enum class Kind { Uniform, Rademacher } kind = Kind::Uniform;
  double half_width = 1.0;
};

/// Scalar AR(1): X_{t+1} = rate * X_t + innovation; |rate| < 1 required.
/// burn_in < 0 picks default_burn_in(|rate|).
std::unique_ptr<StationarySampler> ar_model(double rate, NoiseSpec noise,
                                            int burn_in = -1);

/// Random-Lipschitz iterated function system: each step applies one affine
/// contraction drawn by weight. The mean contraction coefficient
/// sum_i w_i |slope_i| must be < 1; the constructor reports the measured value
/// when rejecting. Empty weights mean uniform. burn_in < 0 picks
/// default_burn_in(mean contraction).
struct AffineMap {
  double slope = 0.0;
  double intercept = 0.0;
};

std::unique_ptr<StationarySampler> random_lipschitz(std::vector<AffineMap> maps,
                                                    std::vector<double> weights = {},
                                                    int burn_in = -1);

/// Steps after which a contraction at the given rate forgets its start to
/// within 1e-8: ceil(ln 1e-8 / ln rate).
int default_burn_in(double rate);

}  // namespace fourmoment
