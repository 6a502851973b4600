#include "fourmoment/model.hpp"

#include <cmath>

namespace fourmoment {

namespace {

void check_stochastic(const Eigen::MatrixXd& p) {
  if (p.rows() == 0 || p.rows() != p.cols()) {
    throw Error("not_stochastic", "P must be a nonempty square matrix");
  }
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < p.cols(); ++j) {
      const double v = p(i, j);
      if (!std::isfinite(v) || v < -kStochasticTol) {
        throw Error("not_stochastic", "P not stochastic: row " + std::to_string(i));
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > kStochasticTol) {
      throw Error("not_stochastic", "P not stochastic: row " + std::to_string(i));
    }
  }
}

}  // namespace

FiniteMarkovModel::FiniteMarkovModel(std::vector<std::string> states, Eigen::MatrixXd transition,
                                     std::optional<Eigen::VectorXd> nu,
                                     std::optional<Eigen::VectorXd> coords)
    : states_(std::move(states)), transition_(std::move(transition)) {
  check_stochastic(transition_);
  const int s = size();
  if (states_.empty()) {
    states_.reserve(s);
    for (int i = 0; i < s; ++i) states_.push_back("s" + std::to_string(i));
  } else if (static_cast<int>(states_.size()) != s) {
    throw Error("bad_argument", "state label count does not match P");
  }
  if (coords.has_value()) {
    if (coords->size() != s) throw Error("bad_argument", "coords size does not match P");
    coords_ = std::move(*coords);
  } else {
    coords_ = Eigen::VectorXd::LinSpaced(s, 0.0, static_cast<double>(s - 1));
    if (s == 1) coords_.setZero();
  }
  if (nu.has_value()) attach_stationary(std::move(*nu));
}

const Eigen::VectorXd& FiniteMarkovModel::stationary() const {
  if (!nu_.has_value()) throw Error("no_measure", "no stationary measure attached");
  return *nu_;
}

void FiniteMarkovModel::attach_stationary(Eigen::VectorXd nu) {
  if (nu.size() != size()) throw Error("bad_measure", "nu size does not match P");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < nu.size(); ++i) {
    if (!std::isfinite(nu[i]) || nu[i] < -kStochasticTol) {
      throw Error("bad_measure", "nu is not a probability vector");
    }
    sum += nu[i];
  }
  if (std::abs(sum - 1.0) > 1e-10) throw Error("bad_measure", "nu does not sum to 1");
  const double residual = (transition_.transpose() * nu - nu).lpNorm<1>();
  if (residual > kStationarityTol) {
    throw Error("bad_measure", "nu is not stationary for P (residual " + std::to_string(residual) + ")");
  }
  nu_ = std::move(nu);
}

}  // namespace fourmoment
