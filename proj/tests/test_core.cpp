#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "fourmoment/certificate.hpp"
#include "fourmoment/model.hpp"
#include "fourmoment/numeric.hpp"
#include "fourmoment/observable.hpp"

using namespace fourmoment;

namespace {

Eigen::MatrixXd sym_p(double p) {
  Eigen::MatrixXd t(2, 2);
  t << 1.0 - p, p, p, 1.0 - p;
  return t;
}

Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST_CASE("compensated sum recovers what plain doubles lose") {
  CompensatedSum cs;
  cs.add(1e16);
  cs.add(1.0);
  cs.add(-1e16);
  CHECK(cs.value() == 1.0);  // plain double arithmetic returns 0 or 2 here

  CompensatedSum tenth;
  for (int i = 0; i < 1000; ++i) tenth.add(0.1);
  CHECK(std::abs(tenth.value() - 100.0) < 1e-12);
}

TEST_CASE("integer powers and q-th roots") {
  CHECK(pow_int(2.0, 10) == 1024.0);
  CHECK(pow_int(0.5, 3) == 0.125);
  CHECK(pow_int(7.0, 0) == 1.0);
  CHECK(theta_pow(0.5, 4) == 0.0625);
  CHECK(root_q(16.0, 2.0) == 4.0);
  CHECK(root_q(16.0, 4.0) == 2.0);
  CHECK(root_q(8.0, 1.0) == 8.0);
  CHECK(root_q(27.0, 3.0) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("sample moments of a known vector") {
  const std::vector<double> xs = {1.0, 2.0, 3.0, 4.0, 5.0};
  const SampleMoments m = sample_moments(xs);
  CHECK(m.mean == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(m.variance == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(m.skewness == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("normal cdf and KS distance") {
  CHECK(normal_cdf(0.0) == 0.5);
  CHECK(normal_cdf(1.96) == doctest::Approx(0.9750021048517795).epsilon(1e-13));
  CHECK(normal_cdf(-1.96) == doctest::Approx(1.0 - 0.9750021048517795).epsilon(1e-10));

  // A single observation at 0: empirical CDF jumps 0 -> 1 there, Phi(0)=0.5.
  CHECK(ks_distance_to_normal({0.0}) == doctest::Approx(0.5).epsilon(1e-15));

  // Normal quantile grid: KS collapses to the half-spacing of the grid.
  std::vector<double> zs;
  const int n = 2000;
  for (int i = 0; i < n; ++i) {
    const double u = (i + 0.5) / n;
    // crude bisection inverse of normal_cdf
    double lo = -10.0, hi = 10.0;
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      (normal_cdf(mid) < u ? lo : hi) = mid;
    }
    zs.push_back(0.5 * (lo + hi));
  }
  CHECK(ks_distance_to_normal(std::move(zs)) < 1.0 / n);
}

TEST_CASE("model validation rejects broken transition matrices") {
  Eigen::MatrixXd bad(2, 2);
  bad << 0.5, 0.6, 0.5, 0.5;
  CHECK_THROWS_WITH_AS(FiniteMarkovModel({"a", "b"}, bad), "P not stochastic: row 0", Error);

  Eigen::MatrixXd neg(2, 2);
  neg << 1.1, -0.1, 0.5, 0.5;
  CHECK_THROWS_AS(FiniteMarkovModel({"a", "b"}, neg), Error);

  Eigen::MatrixXd rect(2, 3);
  rect.setConstant(1.0 / 3.0);
  CHECK_THROWS_AS(FiniteMarkovModel({"a", "b"}, rect), Error);

  try {
    FiniteMarkovModel m({"a", "b"}, bad);
  } catch (const Error& e) {
    CHECK(e.code() == "not_stochastic");
  }
}

TEST_CASE("model stationary attachment is validated") {
  FiniteMarkovModel m({"a", "b"}, sym_p(0.25));
  CHECK_FALSE(m.has_stationary());
  CHECK_THROWS_AS((void)m.stationary(), Error);  // no_measure
  try {
    (void)m.stationary();
  } catch (const Error& e) {
    CHECK(e.code() == "no_measure");
  }

  CHECK_THROWS_AS(m.attach_stationary(vec2(0.9, 0.2)), Error);   // not a probability vector
  CHECK_THROWS_AS(m.attach_stationary(vec2(0.9, 0.1)), Error);   // not stationary for P
  m.attach_stationary(vec2(0.5, 0.5));
  CHECK(m.stationary()[0] == 0.5);

  // default coords are state indices
  CHECK(m.coords()[0] == 0.0);
  CHECK(m.coords()[1] == 1.0);
}

TEST_CASE("observable metadata: values, hat, indicator, coordinate") {
  const Observable v = Observable::from_values(vec2(1.0, -3.0));
  CHECK(v.banach_norm() == 3.0);  // defaults to max |values|
  CHECK(v.at(0) == 1.0);
  CHECK(v.at(1) == -3.0);
  CHECK(v.q() == 2.0);
  CHECK_THROWS_AS(Observable::from_values(vec2(1.0, -3.0), 2.0, NormKind::Sup, 2.0), Error);

  const Observable h = Observable::hat(0.25, 0.5, 0.1);
  CHECK(h.norm_kind() == NormKind::Lipschitz);
  CHECK(h.banach_norm() == doctest::Approx(11.0).epsilon(1e-12));  // 1 + 1/ramp
  CHECK(h.eval_point(0.2) == 0.0);
  CHECK(h.eval_point(0.3) == doctest::Approx(0.5).epsilon(1e-12));  // mid-ramp
  CHECK(h.eval_point(0.4) == 1.0);
  CHECK(h.eval_point(0.55) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(h.eval_point(0.7) == 0.0);

  const Observable ind = Observable::indicator(0.25, 0.5);
  CHECK(ind.norm_kind() == NormKind::BV);
  CHECK(ind.banach_norm() == 3.0);
  CHECK(ind.eval_point(0.25) == 0.0);  // (lo, hi]
  CHECK(ind.eval_point(0.3) == 1.0);
  CHECK(ind.eval_point(0.5) == 1.0);
  CHECK(ind.eval_point(0.51) == 0.0);

  const Observable c = Observable::coordinate();
  CHECK(c.banach_norm() == 2.0);
  CHECK(c.eval_point(0.73) == 0.73);
}

TEST_CASE("centering is exact and idempotent") {
  FiniteMarkovModel m({"a", "b"}, sym_p(0.25), vec2(0.5, 0.5));

  const Observable phi = Observable::from_values(vec2(1.0, -1.0));
  CHECK(mean_under(phi, m) == 0.0);
  const Observable same = center(phi, m);
  CHECK(same.values() == phi.values());

  const Observable shifted = Observable::from_values(vec2(2.0, 0.0));
  CHECK(mean_under(shifted, m) == 1.0);
  const Observable cent = center(shifted, m);
  CHECK(cent.at(0) == 1.0);
  CHECK(cent.at(1) == -1.0);
  CHECK(cent.banach_norm() == 1.0);  // sup metadata recomputed
  const Observable twice = center(cent, m);
  CHECK(twice.values() == cent.values());
}

TEST_CASE("norm profile on the +/-1 observable is all ones") {
  FiniteMarkovModel m({"a", "b"}, sym_p(0.25), vec2(0.5, 0.5));
  const Observable phi = Observable::from_values(vec2(1.0, -1.0));
  const NormProfile np = norm_profile(phi, m, 2.0);
  CHECK(np.phi4_l1 == 1.0);
  CHECK(np.phi3_lq == 1.0);
  CHECK(np.phi2_lq == 1.0);
  CHECK(np.phi2_l1 == 1.0);
  CHECK(np.phi_lq == 1.0);
  CHECK(np.banach == 1.0);
  CHECK(np.m == 1.0);
  CHECK_THROWS_AS(norm_profile(phi, m, 0.5), Error);  // q < 1
}

TEST_CASE("certificate constructor validates its parameters") {
  const std::vector<std::string> names = {"e0"};
  CHECK_THROWS_AS(ErgodicityCertificate(0.0, 0.5, 2.0, 1.0, 1.0, 8, names), Error);
  CHECK_THROWS_AS(ErgodicityCertificate(1.0, 0.0, 2.0, 1.0, 1.0, 8, names), Error);
  CHECK_THROWS_AS(ErgodicityCertificate(1.0, 1.0, 2.0, 1.0, 1.0, 8, names), Error);
  CHECK_THROWS_AS(ErgodicityCertificate(1.0, 0.5, 0.5, 1.0, 1.0, 8, names), Error);
  CHECK_THROWS_AS(ErgodicityCertificate(1.0, 0.5, 2.0, 1.0, 1.0, 0, names), Error);
  const ErgodicityCertificate ok(1.0, 0.5, 2.0, 1.0, 1.0, 8, names);
  CHECK(ok.kappa() == 1.0);
  CHECK(ok.horizon() == 8);
}

TEST_CASE("closure coverage is bitwise on values and monotone in cutoff") {
  ErgodicityCertificate cert(1.0, 0.5, 2.0, 1.0, 1.0, 8, {"e0"});
  const Eigen::VectorXd phi = vec2(1.0, -1.0);
  CHECK_FALSE(cert.covers_closure(phi, 3));  // nothing recorded yet
  cert.record_closure(phi, 5);
  CHECK(cert.covers_closure(phi, 5));
  CHECK(cert.covers_closure(phi, 3));        // smaller demand is covered
  CHECK_FALSE(cert.covers_closure(phi, 6));  // larger demand is not
  CHECK_FALSE(cert.covers_closure(vec2(1.0, -1.0 + 1e-15), 3));
  CHECK_FALSE(cert.covers_closure(Eigen::VectorXd::Ones(3), 3));
}
