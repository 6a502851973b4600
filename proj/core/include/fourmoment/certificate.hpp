#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fourmoment/model.hpp"

namespace fourmoment {

/// Empirical contraction certificate for a finite model in the sup norm:
///
///   (decay)     ||P^n f - Pi f||  <=  kappa * theta^n * ||f||   for every
///               recorded probe f and every 1 <= n <= horizon,
///   (embedding) ||f||_p <= C ||f||   (C = 1 for the sup norm),
///   (product)   ||f * g|| <= M ||f|| ||g||   (M = 1 for the sup norm).
///
/// kappa is the measured sup of the decay ratios over the probe set, so the
/// decay inequality holds on the probes by construction. The certificate is
/// evidence over its probes and horizon, not a proof for arbitrary f; bound
/// checking (the inequality ledger) therefore demands that its probe set be
/// closed under the specific functions the bound derivations apply decay to.
class ErgodicityCertificate {
 public:
  ErgodicityCertificate(double kappa, double theta, double p, double embedding_c,
                        double algebra_m, int horizon, std::vector<std::string> probe_names);

  double kappa() const noexcept { return kappa_; }
  double theta() const noexcept { return theta_; }
  double p() const noexcept { return p_; }
  double embedding_c() const noexcept { return c_; }
  double algebra_m() const noexcept { return m_; }
  int horizon() const noexcept { return horizon_; }
  const std::vector<std::string>& probe_names() const noexcept { return probe_names_; }

  /// Record that the probe set contained phi, phi*(P^k phi) for k <= cutoff and
  /// phi*P^j(phi*(P^k phi)) for j,k <= cutoff.
  void record_closure(Eigen::VectorXd phi_values, int cutoff);
  /// True when record_closure was called with these values (bitwise) and a
  /// cutoff at least as large.
  bool covers_closure(const Eigen::VectorXd& phi_values, int cutoff) const;

 private:
  double kappa_, theta_, p_, c_, m_;
  int horizon_;
  std::vector<std::string> probe_names_;
  std::optional<std::pair<Eigen::VectorXd, int>> closure_;
};

}  // namespace fourmoment
