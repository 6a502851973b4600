#pragma once

#include <vector>

#include <Eigen/Dense>

#include "fourmoment/model.hpp"
#include "fourmoment/observable.hpp"

namespace fourmoment {

/// Combinatorial weight of the ordered index tuple behind gap pattern
/// (i, j, k): 24 divided by the factorials of tie-run lengths among the four
/// partial-sum positions 0, i, i+j, i+j+k.
int tuple_multiplicity(int i, int j, int k);

/// Hard ceiling on state count for the exact linear-algebra moment machinery.
inline constexpr int kDefaultExactCap = 512;

/// Exact stationary moment calculator for a finite chain and a centered or
/// uncentered observable given by state values. Cross moments
///   m(i,j,k) = nu^T Dphi P^i Dphi P^j Dphi P^k phi
/// are assembled from cached rows a_i = (nu . phi)^T P^i and columns
/// c_k = phi . (P^k phi), with the middle power applied by row recurrence, so
/// a full gap table up to G costs O(G^2 s^2 + G^3 s) instead of G^3 s^2.
class MomentOracle {
 public:
  MomentOracle(FiniteMarkovModel model, Observable phi);

  const FiniteMarkovModel& model() const { return model_; }
  const Eigen::VectorXd& phi() const { return phi_values_; }

  double mean() const;                       // nu . phi
  double covariance(int gap);                // E[phi(X_0) phi(X_gap)] - mean^2
  double cross_moment(int i, int j, int k);  // m(i,j,k) above

  /// Exact E[S_n^4] for the centered partial sum: requires a centered phi
  /// (mean below tolerance) and sums (n - g) * M(g) over gaps g <= n-1 with
  /// Neumaier accumulation per gap bucket.
  double fourth_moment(int n);
  /// E[S_n^4] for each n in 1..n_max, sharing one gap-table sweep.
  std::vector<double> fourth_moments(int n_max);

  /// Exact remainder nu^T Dphi P^i [ phi . (P^j g_k - (nu . g_k) 1) ] used by
  /// the middle-gap ledger row; g_k = phi . (P^k phi).
  double case2_remainder(int i, int j, int k);

 private:
  const Eigen::VectorXd& row_power(int i);  // (nu . phi)^T P^i, cached
  const Eigen::VectorXd& col_power(int k);  // phi . (P^k phi), cached
  void ensure_buckets(int gmax);            // M(g) = sum_{i+j+k=g} mult * m

  FiniteMarkovModel model_;
  Eigen::VectorXd phi_values_;
  Eigen::VectorXd nu_phi_;                  // nu . phi elementwise
  std::vector<Eigen::VectorXd> row_cache_;  // index i
  std::vector<Eigen::VectorXd> col_cache_;  // index k
  std::vector<Eigen::VectorXd> pk_cache_;   // P^k phi
  std::vector<double> buckets_;             // index g
};

/// Brute-force E[S_n^4] by full path enumeration over state tuples; O(s^n),
/// usable only for tiny (s, n). Exists as an independent cross-check of the
/// gap-table algebra.
double enumerate_fourth_moment(const FiniteMarkovModel& model,
                               const Observable& phi, int n);

/// Green-Kubo asymptotic variance sigma^2 = E[phi^2] + 2 sum_{k>=1} cov(k),
/// truncated when the certificate-style tail bound drops below tol.
struct GreenKubo {
  double sigma2 = 0.0;
  int truncation = 0;
  double tail_bound = 0.0;
};

GreenKubo green_kubo_sigma2(MomentOracle& oracle, double kappa, double theta,
                            double tol = 1e-14);

}  // namespace fourmoment
