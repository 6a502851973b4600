#pragma once

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fourmoment {

/// Library error with a stable machine-readable code alongside the message.
/// Codes in use: not_stochastic, bad_measure, no_measure, not_strongly_ergodic,
/// no_spectral_gap, no_convergence, probe_closure_missing, exponent_mismatch,
/// bad_argument, cap_exceeded, degenerate, schema, unknown_kind, io.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what) : std::runtime_error(what), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

inline constexpr double kStochasticTol = 1e-12;    // row sums and probability vectors
inline constexpr double kStationarityTol = 1e-10;  // l1 residual of nu^T P = nu^T

/// Finite-state Markov model: a row-stochastic matrix over labelled states,
/// optionally carrying its stationary vector and a numeric embedding of the
/// states (cell midpoints for discretized maps, numeric labels otherwise).
class FiniteMarkovModel {
 public:
  FiniteMarkovModel(std::vector<std::string> states, Eigen::MatrixXd transition,
                    std::optional<Eigen::VectorXd> nu = std::nullopt,
                    std::optional<Eigen::VectorXd> coords = std::nullopt);

  int size() const noexcept { return static_cast<int>(transition_.rows()); }
  const Eigen::MatrixXd& transition() const noexcept { return transition_; }
  const std::vector<std::string>& states() const noexcept { return states_; }

  bool has_stationary() const noexcept { return nu_.has_value(); }
  /// Throws Error{no_measure} when no stationary vector is attached.
  const Eigen::VectorXd& stationary() const;
  /// Validates nu (probability vector, stationarity residual) before storing.
  void attach_stationary(Eigen::VectorXd nu);

  /// Numeric embedding of states; defaults to 0,1,...,s-1.
  const Eigen::VectorXd& coords() const noexcept { return coords_; }

 private:
  std::vector<std::string> states_;
  Eigen::MatrixXd transition_;
  std::optional<Eigen::VectorXd> nu_;
  Eigen::VectorXd coords_;
};

}  // namespace fourmoment
