#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fourmoment/certificate.hpp"
#include "fourmoment/model.hpp"
#include "fourmoment/observable.hpp"
#include "fourmoment/systems.hpp"

namespace fourmoment {

/// Stationary row vector of P: solves nu^T P = nu^T, sum nu = 1 by replacing
/// one equation of (P^T - I) nu = 0 with the normalization. Checks the model
/// is irreducible and aperiodic first and the residual afterwards.
Eigen::VectorXd stationary(const FiniteMarkovModel& model);

struct SpectralGapEstimate {
  double theta = 0.0;        // subdominant eigenvalue modulus of P
  int iterations = 0;
  double residual = 0.0;
  bool complex_pair = false; // dominant deflated mode is a conjugate pair
};

/// Modulus of the second-largest eigenvalue via power iteration on the
/// deflated operator A = P - 1 nu^T (applied matrix-free). A two-lag quadratic
/// fit resolves complex conjugate pairs without complex arithmetic.
SpectralGapEstimate subdominant_modulus(const FiniteMarkovModel& model,
                                        double tol = 1e-12,
                                        int max_iterations = 100000,
                                        std::uint64_t restart_seed = 0x5EEDULL);

/// What to measure when certifying ||P^n f - Pi f|| <= kappa theta^n ||f||.
/// The coordinate indicators e_i are always probed; `probes` adds more.
struct CertificateRequest {
  NormKind norm = NormKind::Sup;
  double p = 2.0;           // declared L^p embedding order (any p works at C=1 in sup norm)
  int horizon = 64;         // decay is measured over n = 1..horizon
  std::vector<Eigen::VectorXd> probes;       // extra functions f to test decay on
  std::vector<std::string> probe_names;
  /// When set, probes are augmented with the closure family of this observable
  /// up to the given cutoff (phi, phi*P^k phi, phi*P^j(phi*P^k phi)) and the
  /// horizon is raised to at least the cutoff, so ledger bounds become
  /// certificate-sound.
  std::optional<std::pair<Eigen::VectorXd, int>> probe_closure;
};

/// Measured strong-ergodicity certificate: theta from the spectrum, kappa as
/// the sup over probes and horizons of ||P^n f - Pi f|| / (theta^n ||f||).
ErgodicityCertificate theta_kappa(const FiniteMarkovModel& model,
                                  const CertificateRequest& request);

/// Per-horizon worst-case decay ratios, for reporting/plotting.
struct DecayDiagnostic {
  std::vector<double> horizon_ratio;  // sup_f ||P^n f - Pi f|| / ||f||
  double kappa = 0.0;
  double theta = 0.0;
};

DecayDiagnostic decay_rate_diagnostic(const FiniteMarkovModel& model,
                                      const CertificateRequest& request);

/// Ulam discretization of an interval map on a uniform grid of `cells` cells.
/// Piecewise-linear maps get exact interval-intersection row weights; the
/// Gauss map is discretized by deterministic stratified midpoint sampling
/// with `samples_per_cell` points per cell.
struct UlamOptions {
  int cells = 256;
  int samples_per_cell = 64;  // only used when the map is not piecewise linear
};

FiniteMarkovModel ulam(const IntervalMap& map, const UlamOptions& options);

}  // namespace fourmoment
