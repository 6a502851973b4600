#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "fourmoment/numeric.hpp"
#include "fourmoment/observable.hpp"
#include "fourmoment/oracle.hpp"
#include "fourmoment/sampler.hpp"
#include "fourmoment/spectral.hpp"
#include "fourmoment/systems.hpp"
#include "fourmoment/verify.hpp"

using namespace fourmoment;

namespace {

Observable pm_one() {
  Eigen::VectorXd v(2);
  v << 1.0, -1.0;
  return Observable::from_values(v);
}

NormProfile unit_profile() {
  NormProfile p;
  p.phi4_l1 = p.phi3_lq = p.phi2_lq = p.phi2_l1 = p.phi_lq = p.banach = 1.0;
  p.m = 1.0;
  p.q = 2.0;
  return p;
}

ErgodicityCertificate closed_certificate(const FiniteMarkovModel& model,
                                         const Observable& phi, int cutoff) {
  CertificateRequest req;
  req.horizon = std::max(64, cutoff);
  req.probe_closure = std::make_pair(phi.values(), cutoff);
  return theta_kappa(model, req);
}

}  // namespace

TEST_CASE("bound terms at n = 10 on the unit profile") {
  const MomentReport r = quartic_bound_terms(unit_profile(), 10);
  CHECK(r.term1 == doctest::Approx(3.3302465198892945).epsilon(1e-12));
  CHECK(r.term2 == doctest::Approx(19.218120556728056).epsilon(1e-12));
  CHECK(r.term3 == doctest::Approx(286.67473750380924).epsilon(1e-12));
  CHECK_THROWS_AS(quartic_bound_terms(unit_profile(), 0), Error);
}

TEST_CASE("bounded-observable corollary right-hand side") {
  NormProfile p = unit_profile();
  p.banach = 9.0;  // ln(B + 1) = ln 10
  CHECK(bounded_quartic_rhs(p, 10) == doctest::Approx(652.2705265854486).epsilon(1e-12));
  p.m = 2.0;  // the cube of the sup bound scales the whole expression
  CHECK(bounded_quartic_rhs(p, 10) == doctest::Approx(8.0 * 652.2705265854486).epsilon(1e-12));
}

TEST_CASE("crossover threshold n0") {
  CHECK(threshold_n0(0.5, 1.0) == 1);
  CHECK(threshold_n0(0.5, 10.0) == 4);    // 2^-4 * 10 = 0.625
  CHECK(threshold_n0(0.5, 1000.0) == 10); // 2^-10 * 1000 < 1
  CHECK(threshold_n0(0.99, 1e6) == 1375);
  CHECK_THROWS_AS(threshold_n0(0.0, 1.0), Error);
  CHECK_THROWS_AS(threshold_n0(1.0, 1.0), Error);
  CHECK_THROWS_AS(threshold_n0(0.5, 0.0), Error);
  try {
    threshold_n0(1.0 - 1e-9, std::exp(1.0) * 1e4);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == "cap_exceeded");
  }
}

TEST_CASE("exact-mode bound sweep on the iid Rademacher chain") {
  MomentOracle oracle(two_point_flip(0.5), pm_one());
  const NormProfile profile = norm_profile(pm_one(), two_point_flip(0.5), 2.0);
  const std::vector<MomentReport> rows = verify_bound(oracle, profile, {10, 100});
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].lhs == doctest::Approx(280.0).epsilon(1e-12));
  CHECK(rows[0].lhs_std_error == 0.0);
  CHECK_FALSE(rows[0].mc_mode);
  CHECK(rows[0].empirical_K == doctest::Approx(0.9054950805824218).epsilon(1e-9));
  // the iid ratio climbs toward 3 / (ln 2 + 1)^2 from below
  const double limit = 3.0 / pow_int(std::log(2.0) + 1.0, 2);
  CHECK(limit == doctest::Approx(1.0464821651611826).epsilon(1e-12));
  CHECK(rows[1].empirical_K > rows[0].empirical_K);
  CHECK(rows[1].empirical_K < limit);
}

TEST_CASE("MC-mode bound sweep brackets the exact sweep") {
  const FiniteMarkovModel m = two_point_flip(0.25);
  MomentOracle oracle(m, pm_one());
  const NormProfile profile = norm_profile(pm_one(), m, 2.0);
  BoundOptions opts;
  opts.ns = {8, 16};
  opts.mc.reps = 800;
  opts.mc.seed = 21;
  const auto sampler = model_sampler(m);
  const std::vector<MomentReport> rows = verify_bound(*sampler, pm_one(), profile, opts);
  REQUIRE(rows.size() == 2);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double exact = oracle.fourth_moment(static_cast<int>(rows[i].n));
    CHECK(rows[i].mc_mode);
    CHECK(rows[i].lhs_std_error > 0.0);
    CHECK(std::abs(rows[i].lhs - exact) <= 6.0 * rows[i].lhs_std_error);
    // MC mode charges the upper confidence value to the ratio
    const double denom = rows[i].term1 + rows[i].term2 + rows[i].term3;
    CHECK(rows[i].empirical_K ==
          doctest::Approx((rows[i].lhs + 3.0 * rows[i].lhs_std_error) / denom).epsilon(1e-12));
  }
}

TEST_CASE("ledger demands a closure-covering certificate") {
  const FiniteMarkovModel m = two_point_flip(0.25);
  MomentOracle oracle(m, pm_one());
  const NormProfile profile = norm_profile(pm_one(), m, 2.0);

  CertificateRequest bare;
  bare.horizon = 64;
  const ErgodicityCertificate no_closure = theta_kappa(m, bare);
  try {
    inequality_ledger(oracle, profile, no_closure, 6);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == "probe_closure_missing");
  }

  const ErgodicityCertificate small = closed_certificate(m, pm_one(), 4);
  CHECK_THROWS_AS(inequality_ledger(oracle, profile, small, 6), Error);
}

TEST_CASE("symmetric-chain ledger rows match the analytic moments") {
  const FiniteMarkovModel m = two_point_flip(0.25);
  MomentOracle oracle(m, pm_one());
  const NormProfile profile = norm_profile(pm_one(), m, 2.0);
  const ErgodicityCertificate cert = closed_certificate(m, pm_one(), 8);
  const LedgerReport report = inequality_ledger(oracle, profile, cert, 8);

  CHECK(report.cutoff == 8);
  CHECK(report.n0 == 1);
  CHECK(report.theta_n0_check);
  CHECK(report.min_slack >= -1e-12);
  CHECK(report.decomposition_bound_at_cutoff >= report.exact_s4_at_cutoff);
  CHECK(report.exact_s4_at_cutoff == doctest::Approx(oracle.fourth_moment(9)).epsilon(1e-12));

  bool saw_case1 = false, saw_case2 = false, saw_case3 = false, saw_cov = false;
  for (const LedgerEntry& e : report.entries) {
    CHECK(e.slack >= -1e-12);
    CHECK(e.slack == doctest::Approx(e.bound - e.lhs).epsilon(1e-15));
    if (e.inequality == "cas1.1") {
      saw_case1 = true;
      // |m(i,j,k)| = 0.5^{i+k} <= E|phi|^4 = 1
      CHECK(e.lhs == doctest::Approx(pow_int(0.5, e.i + e.k)).epsilon(1e-11));
      CHECK(e.bound == 1.0);
    }
    if (e.inequality == "I-bound") saw_case2 = true;
    if (e.inequality == "cas3.1+3.2") saw_case3 = true;
    if (e.inequality == "cov-geo") {
      saw_cov = true;
      CHECK(e.lhs == doctest::Approx(pow_int(0.5, e.j)).epsilon(1e-11));
    }
  }
  CHECK(saw_case1);
  CHECK(saw_case2);
  CHECK(saw_case3);
  CHECK(saw_cov);
}

TEST_CASE("reflected-walk ledger stays sound on a three-state chain") {
  const FiniteMarkovModel m = reflected_walk(3, 0.25, 0.25);
  Eigen::VectorXd v(3);
  v << 1.0, -0.5, 2.0;
  const Observable phi = center(Observable::from_values(v), m);
  MomentOracle oracle(m, phi);
  const NormProfile profile = norm_profile(phi, m, 2.0);
  const ErgodicityCertificate cert = closed_certificate(m, phi, 10);
  const LedgerReport report = inequality_ledger(oracle, profile, cert, 10);

  CHECK(report.min_slack >= -1e-12);
  CHECK(!report.entries.empty());
  // nontrivial middle-gap remainders exist on this chain
  bool nonzero_case2 = false;
  for (const LedgerEntry& e : report.entries) {
    if (e.inequality == "I-bound" && std::abs(e.lhs) > 1e-15) nonzero_case2 = true;
  }
  CHECK(nonzero_case2);
}

TEST_CASE("clt_check validates its certificate and variance inputs") {
  const FiniteMarkovModel m = two_point_flip(0.25);
  const auto sampler = model_sampler(m);
  const Observable phi = pm_one();

  CltOptions opts;
  opts.n = 200;
  opts.reps = 150;
  opts.seed = 9;
  opts.certificate_p = 1.5;
  try {
    clt_check(*sampler, phi, 3.0, opts);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == "exponent_mismatch");
  }

  CltOptions ok = opts;
  ok.certificate_p.reset();
  try {
    clt_check(*sampler, phi, 0.0, ok);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == "degenerate");
  }
}

TEST_CASE("clt diagnostics on the symmetric chain approach the normal law") {
  const FiniteMarkovModel m = two_point_flip(0.25);
  CltOptions opts;
  opts.n = 2000;
  opts.reps = 600;
  opts.seed = 31;
  const CltDiagnostics diag = clt_check(m, pm_one(), 1.0, 0.5, opts);
  CHECK(diag.sigma2 == doctest::Approx(3.0).epsilon(1e-12));  // exact Green-Kubo inside
  CHECK(std::abs(diag.mean) < 0.2);
  CHECK(std::abs(diag.variance - 1.0) < 0.2);
  CHECK(std::abs(diag.kurtosis - 3.0) < 0.6);
  CHECK(diag.ks_distance < 0.1);
}

TEST_CASE("tightness table on iid uniform reproduces the binomial reference") {
  const auto sampler = iid_uniform_sampler();
  McOptions mc;
  mc.n = 100;
  mc.reps = 2000;
  mc.seed = 13;
  const TightnessReport report =
      empirical_tightness(*sampler, {{0.25, 0.35}, {0.25, 0.75}}, mc);
  REQUIRE(report.rows.size() == 2);
  const TightnessRow& r = report.rows[0];
  CHECK(r.p == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(r.budget == doctest::Approx(110.0).epsilon(1e-10));
  CHECK(std::abs(r.moment - 247.14) <= 5.0 * r.std_error);
  CHECK(r.ratio == doctest::Approx(r.moment / r.budget).epsilon(1e-12));
  CHECK(report.fitted_C == doctest::Approx(std::max(report.rows[0].ratio, report.rows[1].ratio))
                               .epsilon(1e-15));

  // explicit probabilities bypass the sampler cdf
  const TightnessReport manual =
      empirical_tightness(*sampler, {{0.25, 0.35}}, {0.1}, mc);
  CHECK(manual.rows[0].p == 0.1);

  CHECK_THROWS_AS(empirical_tightness(*sampler, {}, mc), Error);
  CHECK_THROWS_AS(empirical_tightness(*sampler, {{0.25, 0.35}}, {0.1, 0.2}, mc), Error);
  CHECK_THROWS_AS(empirical_tightness(*sampler, {{0.5, 0.4}}, mc), Error);
}
