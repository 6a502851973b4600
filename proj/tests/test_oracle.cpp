#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "fourmoment/numeric.hpp"
#include "fourmoment/oracle.hpp"
#include "fourmoment/systems.hpp"

using namespace fourmoment;

namespace {

Observable pm_one() {
  Eigen::VectorXd v(2);
  v << 1.0, -1.0;
  return Observable::from_values(v);
}

MomentOracle iid_oracle() { return MomentOracle(two_point_flip(0.5), pm_one()); }
MomentOracle sym_oracle() { return MomentOracle(two_point_flip(0.25), pm_one()); }

}  // namespace

TEST_CASE("tuple multiplicities count ordered index tuples per gap pattern") {
  CHECK(tuple_multiplicity(0, 0, 0) == 1);
  CHECK(tuple_multiplicity(1, 0, 0) == 4);
  CHECK(tuple_multiplicity(0, 0, 2) == 4);
  CHECK(tuple_multiplicity(0, 3, 0) == 6);
  CHECK(tuple_multiplicity(0, 1, 2) == 12);
  CHECK(tuple_multiplicity(1, 2, 0) == 12);
  CHECK(tuple_multiplicity(1, 0, 2) == 12);
  CHECK(tuple_multiplicity(1, 2, 3) == 24);
  // the full count identity is covered by the enumeration agreement below
}

TEST_CASE("iid Rademacher fourth moments equal 3n^2 - 2n") {
  MomentOracle oracle = iid_oracle();
  const std::vector<double> s4 = oracle.fourth_moments(64);
  REQUIRE(s4.size() == 64);
  for (int n = 1; n <= 64; ++n) {
    const double exact = 3.0 * n * n - 2.0 * n;
    CHECK(std::abs(s4[n - 1] - exact) <= 1e-9 * exact);
  }
  CHECK(s4[9] == doctest::Approx(280.0).epsilon(1e-12));
}

TEST_CASE("symmetric chain cross moments factor over disjoint gaps") {
  // phi_t are +-1 with E[phi_s phi_t] = 0.5^{t-s}; four-point moments split as
  // m(i,j,k) = 0.5^i * 0.5^k independent of the middle gap
  MomentOracle oracle = sym_oracle();
  for (int i = 0; i <= 5; ++i) {
    for (int j : {0, 1, 4}) {
      for (int k = 0; k <= 5; ++k) {
        CHECK(oracle.cross_moment(i, j, k) ==
              doctest::Approx(pow_int(0.5, i + k)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("symmetric chain covariances and small fourth moments") {
  MomentOracle oracle = sym_oracle();
  CHECK(oracle.mean() == 0.0);
  for (int g = 0; g <= 8; ++g) {
    CHECK(oracle.covariance(g) == doctest::Approx(pow_int(0.5, g)).epsilon(1e-12));
  }
  CHECK(oracle.fourth_moment(2) == doctest::Approx(12.0).epsilon(1e-12));
  CHECK(oracle.fourth_moment(3) == doctest::Approx(46.0).epsilon(1e-12));
  CHECK(oracle.fourth_moment(4) == doctest::Approx(114.0).epsilon(1e-12));
}

TEST_CASE("fourth_moments(n_max) matches per-n sums") {
  MomentOracle oracle = sym_oracle();
  const std::vector<double> all = oracle.fourth_moments(12);
  for (int n = 1; n <= 12; ++n) {
    CHECK(all[n - 1] == oracle.fourth_moment(n));
  }
}

TEST_CASE("fourth moment refuses uncentered observables") {
  Eigen::MatrixXd p(2, 2);
  p << 0.9, 0.1, 0.5, 0.5;
  Eigen::VectorXd v(2);
  v << 1.0, -1.0;  // mean 2/3 under nu = (5/6, 1/6)
  MomentOracle oracle(doeblin_chain(p), Observable::from_values(v));
  CHECK(oracle.mean() == doctest::Approx(2.0 / 3.0).epsilon(1e-13));
  try {
    oracle.fourth_moment(4);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == "bad_argument");
    CHECK(std::string(e.what()).find("centered") != std::string::npos);
  }
}

TEST_CASE("gap expansion agrees with full path enumeration to 1e-12") {
  struct Case {
    FiniteMarkovModel model;
    Eigen::VectorXd values;
  };
  Eigen::MatrixXd asym(2, 2);
  asym << 0.9, 0.1, 0.5, 0.5;
  std::vector<Case> cases;
  {
    Eigen::VectorXd v(2);
    v << 1.0, -1.0;
    cases.push_back({two_point_flip(0.5), v});
    cases.push_back({two_point_flip(0.25), v});
    cases.push_back({doeblin_chain(asym), v});
  }
  {
    Eigen::VectorXd v(3);
    v << 1.0, -0.5, 2.0;
    cases.push_back({reflected_walk(3, 0.25, 0.25), v});
  }
  {
    Eigen::VectorXd v(4);
    v << 0.0, 1.0, -1.0, 3.0;
    cases.push_back({reflected_walk(4, 0.3, 0.2), v});
  }

  for (const Case& c : cases) {
    const Observable raw = Observable::from_values(c.values);
    const double mean = mean_under(raw, c.model);
    const Observable phi = Observable::from_values(Eigen::VectorXd(c.values.array() - mean));
    MomentOracle oracle(c.model, phi);
    for (int n = 1; n <= 8; ++n) {
      const double a = oracle.fourth_moment(n);
      const double b = enumerate_fourth_moment(c.model, phi, n);
      const double denom = std::max({std::abs(a), std::abs(b), 1e-30});
      CHECK(std::abs(a - b) / denom <= 1e-12);
    }
  }
}

TEST_CASE("path enumeration is capped at n = 12") {
  const FiniteMarkovModel m = two_point_flip(0.5);
  CHECK_THROWS_AS(enumerate_fourth_moment(m, pm_one(), 13), Error);
  CHECK_THROWS_AS(enumerate_fourth_moment(m, pm_one(), 0), Error);
  CHECK(enumerate_fourth_moment(m, pm_one(), 1) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("state-count cap guards the exact machinery") {
  const int s = 513;
  const Eigen::MatrixXd p = Eigen::MatrixXd::Constant(s, s, 1.0 / s);
  const Eigen::VectorXd nu = Eigen::VectorXd::Constant(s, 1.0 / s);
  const FiniteMarkovModel big({}, p, nu);
  try {
    MomentOracle oracle(big, Observable::from_values(Eigen::VectorXd::Zero(s)));
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == "cap_exceeded");
  }
}

TEST_CASE("Green-Kubo variance of the symmetric chain is exactly 3") {
  MomentOracle oracle = sym_oracle();
  const GreenKubo gk = green_kubo_sigma2(oracle, 1.0, 0.5);
  CHECK(gk.sigma2 == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(gk.tail_bound < 1e-13);
  CHECK(gk.truncation > 10);
  CHECK(gk.truncation < 200);

  CHECK_THROWS_AS(green_kubo_sigma2(oracle, 1.0, 0.0), Error);
  CHECK_THROWS_AS(green_kubo_sigma2(oracle, 1.0, 1.0), Error);
}
