#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fourmoment/spectral.hpp"
#include "fourmoment/systems.hpp"

using namespace fourmoment;

TEST_CASE("stationary vectors of the reference chains") {
  Eigen::MatrixXd p(2, 2);
  p << 0.9, 0.1, 0.5, 0.5;
  const Eigen::VectorXd nu = stationary(FiniteMarkovModel({}, p));
  CHECK(nu[0] == doctest::Approx(5.0 / 6.0).epsilon(1e-13));
  CHECK(nu[1] == doctest::Approx(1.0 / 6.0).epsilon(1e-13));
}

TEST_CASE("subdominant modulus hits the analytic eigenvalues") {
  const SpectralGapEstimate sym = subdominant_modulus(two_point_flip(0.25));
  CHECK(std::abs(sym.theta - 0.5) <= 1e-10);
  CHECK_FALSE(sym.complex_pair);

  Eigen::MatrixXd p(2, 2);
  p << 0.9, 0.1, 0.5, 0.5;
  const SpectralGapEstimate asym = subdominant_modulus(doeblin_chain(p));
  CHECK(std::abs(asym.theta - 0.4) <= 1e-10);
}

TEST_CASE("complex conjugate subdominant pair is resolved by modulus") {
  // 0.9 * cyclic shift + 0.1 * uniform: subdominant modes 0.9 e^{+-2pi i/3}
  Eigen::MatrixXd c(3, 3);
  c << 0, 1, 0, 0, 0, 1, 1, 0, 0;
  Eigen::MatrixXd p = 0.9 * c + 0.1 * Eigen::MatrixXd::Constant(3, 3, 1.0 / 3.0);
  const SpectralGapEstimate est = subdominant_modulus(doeblin_chain(p));
  CHECK(std::abs(est.theta - 0.9) <= 1e-8);
  CHECK(est.complex_pair);
}

TEST_CASE("degenerate spectra: reducible, periodic, vanishing gap") {
  Eigen::MatrixXd reducible(2, 2);
  reducible << 1, 0, 0, 1;
  CHECK_THROWS_AS(stationary(FiniteMarkovModel({}, reducible)), Error);

  Eigen::MatrixXd periodic(2, 2);
  periodic << 0, 1, 1, 0;
  try {
    stationary(FiniteMarkovModel({}, periodic));
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == "not_strongly_ergodic");
  }

  Eigen::MatrixXd closing(2, 2);
  const double eps = 5e-14;
  closing << 1 - eps, eps, eps, 1 - eps;  // theta = 1 - 1e-13
  try {
    subdominant_modulus(doeblin_chain(closing));
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == "no_spectral_gap");
  }
}

TEST_CASE("iid chain floors theta at the library minimum") {
  const SpectralGapEstimate est = subdominant_modulus(two_point_flip(0.5));
  CHECK(est.theta == 1e-15);
}

TEST_CASE("theta_kappa measures kappa over the probe sweep") {
  const FiniteMarkovModel m = two_point_flip(0.25);
  CertificateRequest req;
  req.horizon = 64;
  const ErgodicityCertificate cert = theta_kappa(m, req);
  CHECK(std::abs(cert.theta() - 0.5) <= 1e-10);
  // e_i decays at exactly 0.5 * theta^n: kappa = 1/2, and always <= 2
  CHECK(cert.kappa() == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(cert.kappa() <= 2.0);
  CHECK(cert.embedding_c() == 1.0);
  CHECK(cert.algebra_m() == 1.0);
  CHECK(cert.horizon() == 64);
  CHECK(cert.probe_names().size() == 2);

  CHECK_THROWS_AS(theta_kappa(m, CertificateRequest{NormKind::Sup, 2.0, 1}), Error);
  CertificateRequest lip;
  lip.norm = NormKind::Lipschitz;
  CHECK_THROWS_AS(theta_kappa(m, lip), Error);
}

TEST_CASE("explicit probes raise kappa when they decay slower") {
  const FiniteMarkovModel m = two_point_flip(0.25);
  CertificateRequest req;
  req.horizon = 32;
  Eigen::VectorXd phi(2);
  phi << 1.0, -1.0;  // exact eigenfunction at 0.5: ratio 1
  req.probes.push_back(phi);
  req.probe_names.push_back("phi");
  const ErgodicityCertificate cert = theta_kappa(m, req);
  CHECK(cert.kappa() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(cert.probe_names().back() == "phi");
}

TEST_CASE("probe closure records coverage and raises the horizon") {
  const FiniteMarkovModel m = two_point_flip(0.25);
  Eigen::VectorXd phi(2);
  phi << 1.0, -1.0;
  CertificateRequest req;
  req.horizon = 2;
  req.probe_closure = std::make_pair(phi, 30);
  const ErgodicityCertificate cert = theta_kappa(m, req);
  CHECK(cert.horizon() == 30);
  CHECK(cert.covers_closure(phi, 30));
  CHECK(cert.covers_closure(phi, 12));
  CHECK_FALSE(cert.covers_closure(phi, 31));
}

TEST_CASE("ulam discretizations of the doubling map agree across resolutions") {
  const FiniteMarkovModel u16 = ulam(IntervalMap::doubling(), UlamOptions{16, 64});
  const FiniteMarkovModel u32 = ulam(IntervalMap::doubling(), UlamOptions{32, 64});
  const double t16 = subdominant_modulus(u16).theta;
  const double t32 = subdominant_modulus(u32).theta;
  // The doubling map's Ulam chain on 2^m cells is the binary shift: P^m is
  // already uniform, so everything but the Perron root lives at zero and the
  // estimate collapses to the numerical floor at every resolution.
  CHECK(t16 <= 1e-8);
  CHECK(t32 <= 1e-8);
  CHECK(std::abs(t16 - t32) <= 1e-6);
}

TEST_CASE("decay diagnostic ratios shrink along the horizon") {
  const FiniteMarkovModel m = two_point_flip(0.25);
  CertificateRequest req;
  req.horizon = 10;
  const DecayDiagnostic diag = decay_rate_diagnostic(m, req);
  REQUIRE(diag.horizon_ratio.size() == 10);
  for (std::size_t i = 1; i < diag.horizon_ratio.size(); ++i) {
    CHECK(diag.horizon_ratio[i] <= diag.horizon_ratio[i - 1] + 1e-15);
  }
  CHECK(diag.horizon_ratio[0] <= diag.kappa * diag.theta + 1e-12);
}
