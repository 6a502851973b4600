#include "fourmoment/oracle.hpp"

#include <cmath>

#include "fourmoment/numeric.hpp"

namespace fourmoment {

int tuple_multiplicity(int i, int j, int k) {
  // Sorted positions 0, i, i+j, i+j+k; orderings of the multiset = 24 over the
  // factorials of tie-run lengths, ties showing up as zero gaps.
  const int gaps[3] = {i, j, k};
  int mult = 24;
  int run = 1;
  for (int t = 0; t < 3; ++t) {
    if (gaps[t] == 0) {
      ++run;
    } else {
      for (int r = 2; r <= run; ++r) mult /= r;
      run = 1;
    }
  }
  for (int r = 2; r <= run; ++r) mult /= r;
  return mult;
}

MomentOracle::MomentOracle(FiniteMarkovModel model, Observable phi) : model_(std::move(model)) {
  if (model_.size() > kDefaultExactCap) {
    throw Error("cap_exceeded", "model too large for exact moments (states=" +
                                    std::to_string(model_.size()) +
                                    ", cap=" + std::to_string(kDefaultExactCap) + ")");
  }
  phi_values_ = phi.discretized(model_).values();
  nu_phi_ = model_.stationary().cwiseProduct(phi_values_);
  row_cache_.push_back(nu_phi_);                            // a_0
  col_cache_.push_back(phi_values_.cwiseProduct(phi_values_));  // c_0 = phi . phi
  pk_cache_.push_back(phi_values_);                         // P^0 phi
}

const Eigen::VectorXd& MomentOracle::row_power(int i) {
  while (static_cast<int>(row_cache_.size()) <= i) {
    row_cache_.push_back(model_.transition().transpose() * row_cache_.back());
  }
  return row_cache_[static_cast<std::size_t>(i)];
}

const Eigen::VectorXd& MomentOracle::col_power(int k) {
  while (static_cast<int>(col_cache_.size()) <= k) {
    pk_cache_.push_back(model_.transition() * pk_cache_.back());
    col_cache_.push_back(phi_values_.cwiseProduct(pk_cache_.back()));
  }
  return col_cache_[static_cast<std::size_t>(k)];
}

double MomentOracle::mean() const { return nu_phi_.sum(); }

double MomentOracle::covariance(int gap) {
  if (gap < 0) throw Error("bad_argument", "covariance needs gap >= 0");
  const double m = mean();
  return model_.stationary().dot(col_power(gap)) - m * m;
}

double MomentOracle::cross_moment(int i, int j, int k) {
  if (i < 0 || j < 0 || k < 0) throw Error("bad_argument", "cross moment needs gaps >= 0");
  Eigen::VectorXd b = row_power(i).cwiseProduct(phi_values_);
  for (int t = 0; t < j; ++t) b = model_.transition().transpose() * b;
  return b.dot(col_power(k));
}

double MomentOracle::case2_remainder(int i, int j, int k) {
  if (i < 0 || j < 0 || k < 0) throw Error("bad_argument", "remainder needs gaps >= 0");
  Eigen::VectorXd w = col_power(k);
  const double gk_mean = model_.stationary().dot(w);
  for (int t = 0; t < j; ++t) w = model_.transition() * w;
  w.array() -= gk_mean;
  return row_power(i).cwiseProduct(phi_values_).dot(w);
}

void MomentOracle::ensure_buckets(int gmax) {
  if (static_cast<int>(buckets_.size()) > gmax) return;
  buckets_.assign(static_cast<std::size_t>(gmax) + 1, 0.0);
  std::vector<CompensatedSum> acc(static_cast<std::size_t>(gmax) + 1);
  col_power(gmax);  // fill the c_k cache once
  for (int i = 0; i <= gmax; ++i) {
    Eigen::VectorXd b = row_power(i).cwiseProduct(phi_values_);
    for (int j = 0; i + j <= gmax; ++j) {
      if (j > 0) b = model_.transition().transpose() * b;
      for (int k = 0; i + j + k <= gmax; ++k) {
        const double m = b.dot(col_cache_[static_cast<std::size_t>(k)]);
        acc[static_cast<std::size_t>(i + j + k)].add(tuple_multiplicity(i, j, k) * m);
      }
    }
  }
  for (std::size_t g = 0; g < acc.size(); ++g) buckets_[g] = acc[g].value();
}

double MomentOracle::fourth_moment(int n) {
  if (n < 1) throw Error("bad_argument", "fourth moment needs n >= 1");
  const double scale = std::max(1.0, phi_values_.lpNorm<Eigen::Infinity>());
  if (std::abs(mean()) > 1e-12 * scale) {
    throw Error("bad_argument", "fourth moment needs a centered observable");
  }
  ensure_buckets(n - 1);
  CompensatedSum s;
  for (int g = 0; g <= n - 1; ++g) {
    s.add(static_cast<double>(n - g) * buckets_[static_cast<std::size_t>(g)]);
  }
  return s.value();
}

std::vector<double> MomentOracle::fourth_moments(int n_max) {
  if (n_max < 1) throw Error("bad_argument", "fourth moments need n_max >= 1");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n_max));
  ensure_buckets(n_max - 1);
  for (int n = 1; n <= n_max; ++n) out.push_back(fourth_moment(n));
  return out;
}

double enumerate_fourth_moment(const FiniteMarkovModel& model, const Observable& phi, int n) {
  if (n < 1 || n > 12) throw Error("bad_argument", "path enumeration supports 1 <= n <= 12");
  const Eigen::VectorXd values = phi.discretized(model).values();
  const Eigen::VectorXd& nu = model.stationary();
  const Eigen::MatrixXd& p = model.transition();
  const int s = model.size();

  std::vector<int> path(static_cast<std::size_t>(n), 0);
  CompensatedSum total;
  while (true) {
    double prob = nu[path[0]];
    double sum = values[path[0]];
    for (int t = 1; t < n; ++t) {
      prob *= p(path[static_cast<std::size_t>(t - 1)], path[static_cast<std::size_t>(t)]);
      sum += values[path[static_cast<std::size_t>(t)]];
    }
    if (prob != 0.0) {
      const double s2 = sum * sum;
      total.add(prob * s2 * s2);
    }
    int t = n - 1;  // lexicographic odometer over state tuples
    while (t >= 0 && path[static_cast<std::size_t>(t)] == s - 1) {
      path[static_cast<std::size_t>(t)] = 0;
      --t;
    }
    if (t < 0) break;
    ++path[static_cast<std::size_t>(t)];
  }
  return total.value();
}

GreenKubo green_kubo_sigma2(MomentOracle& oracle, double kappa, double theta, double tol) {
  if (!(theta > 0.0 && theta < 1.0)) throw Error("bad_argument", "Green-Kubo needs theta in (0,1)");
  const double banach = oracle.phi().lpNorm<Eigen::Infinity>();
  const Eigen::VectorXd& nu = oracle.model().stationary();
  CompensatedSum phi_sq;
  for (Eigen::Index i = 0; i < nu.size(); ++i) {
    phi_sq.add(nu[i] * oracle.phi()[i] * oracle.phi()[i]);
  }
  const double phi_l2 = std::sqrt(std::max(phi_sq.value(), 0.0));

  GreenKubo out;
  CompensatedSum sum;
  sum.add(phi_sq.value());
  double tp = theta;
  int k = 1;
  constexpr int kMax = 1 << 20;
  for (; k <= kMax; ++k) {
    // tail after including cov(1..k-1): 2 sum_{m>=k} C kappa theta^m phi_l2 B
    const double tail = 2.0 * kappa * phi_l2 * banach * tp / (1.0 - theta);
    if (tail < tol) break;
    sum.add(2.0 * oracle.covariance(k));
    tp *= theta;
  }
  out.sigma2 = sum.value();
  out.truncation = k - 1;
  out.tail_bound = 2.0 * kappa * phi_l2 * banach * tp / (1.0 - theta);
  return out;
}

}  // namespace fourmoment
