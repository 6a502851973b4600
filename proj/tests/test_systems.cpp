#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "fourmoment/sampler.hpp"
#include "fourmoment/spectral.hpp"
#include "fourmoment/systems.hpp"

using namespace fourmoment;

namespace {

double scalar(const SamplerState& s) { return std::get<double>(s); }

}  // namespace

TEST_CASE("two-point flip chain: rows, coords, stationary") {
  const FiniteMarkovModel m = two_point_flip(0.25);
  CHECK(m.size() == 2);
  CHECK(m.transition()(0, 0) == 0.75);
  CHECK(m.transition()(0, 1) == 0.25);
  CHECK(m.transition()(1, 0) == 0.25);
  CHECK(m.has_stationary());
  CHECK(m.stationary()[0] == doctest::Approx(0.5).epsilon(1e-14));
  const std::set<double> coords = {m.coords()[0], m.coords()[1]};
  CHECK(coords == std::set<double>{-1.0, 1.0});
  CHECK_THROWS_AS(two_point_flip(0.0), Error);
  CHECK_THROWS_AS(two_point_flip(1.5), Error);
}

TEST_CASE("reflected walk: blocked boundary steps reflect inward") {
  const FiniteMarkovModel m = reflected_walk(3, 0.25, 0.25);
  const Eigen::MatrixXd& t = m.transition();
  CHECK(t(0, 0) == 0.5);
  CHECK(t(0, 1) == 0.5);
  CHECK(t(1, 0) == 0.25);
  CHECK(t(1, 1) == 0.5);
  CHECK(t(1, 2) == 0.25);
  CHECK(t(2, 1) == 0.5);
  CHECK(t(2, 2) == 0.5);
  CHECK(m.stationary()[0] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(m.stationary()[1] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(m.stationary()[2] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK_THROWS_AS(reflected_walk(1, 0.25, 0.25), Error);
  CHECK_THROWS_AS(reflected_walk(3, 0.7, 0.7), Error);
}

TEST_CASE("doeblin_chain solves and attaches the stationary vector") {
  Eigen::MatrixXd p(2, 2);
  p << 0.9, 0.1, 0.5, 0.5;
  const FiniteMarkovModel m = doeblin_chain(p);
  CHECK(m.stationary()[0] == doctest::Approx(5.0 / 6.0).epsilon(1e-13));
  CHECK(m.stationary()[1] == doctest::Approx(1.0 / 6.0).epsilon(1e-13));

  Eigen::MatrixXd reducible(2, 2);
  reducible << 1.0, 0.0, 0.0, 1.0;
  CHECK_THROWS_AS(doeblin_chain(reducible), Error);

  Eigen::MatrixXd periodic(2, 2);
  periodic << 0.0, 1.0, 1.0, 0.0;
  try {
    doeblin_chain(periodic);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == "not_strongly_ergodic");
    CHECK(std::string(e.what()).find("periodic") != std::string::npos);
  }
}

TEST_CASE("interval maps: formulas and invariant laws") {
  const IntervalMap d = IntervalMap::doubling();
  CHECK(d.apply(0.3) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(d.apply(0.7) == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(d.piecewise_linear());
  CHECK(d.linear_branches().size() == 2);
  CHECK(d.invariant_density(0.3) == 1.0);
  CHECK(d.invariant_cdf(0.3) == doctest::Approx(0.3).epsilon(1e-15));

  const IntervalMap b = IntervalMap::beta(1.5);
  CHECK(b.apply(0.5) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(b.apply(0.8) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK_THROWS_AS(b.invariant_density(0.5), Error);  // no closed form here
  CHECK_THROWS_AS(IntervalMap::beta(1.0), Error);

  const IntervalMap g = IntervalMap::gauss();
  CHECK(g.apply(0.4) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK_FALSE(g.piecewise_linear());
  CHECK_THROWS_AS(g.linear_branches(), Error);
  CHECK(g.invariant_density(0.0) == doctest::Approx(1.0 / std::log(2.0)).epsilon(1e-12));
  CHECK(g.invariant_cdf(1.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("ulam rows of the doubling map at k=4") {
  const FiniteMarkovModel m = ulam(IntervalMap::doubling(), UlamOptions{4, 64});
  const Eigen::MatrixXd& t = m.transition();
  // cell i maps onto cells 2i, 2i+1 (mod 4) with weight 1/2 each
  CHECK(t(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(t(0, 1) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(t(1, 2) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(t(1, 3) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(t(2, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(t(2, 1) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(t(3, 2) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(t(3, 3) == doctest::Approx(0.5).epsilon(1e-12));
  // Lebesgue is invariant for the doubling map
  for (int i = 0; i < 4; ++i) CHECK(m.stationary()[i] == doctest::Approx(0.25).epsilon(1e-12));
  // coords are cell midpoints
  CHECK(m.coords()[0] == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(m.coords()[3] == doctest::Approx(0.875).epsilon(1e-15));
}

TEST_CASE("expanding-map samplers are seed-deterministic and in range") {
  const auto sampler = expanding_map(IntervalMap::doubling());
  CHECK(sampler->burn_in() == 0);  // exact invariant start
  auto c1 = sampler->start(99);
  auto c2 = sampler->start(99);
  auto c3 = sampler->start(100);
  bool any_diff = false;
  double sum = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double a = scalar(c1->next());
    const double b = scalar(c2->next());
    CHECK(a == b);
    any_diff = any_diff || (a != scalar(c3->next()));
    CHECK(a >= 0.0);
    CHECK(a < 1.0);
    sum += a;
  }
  CHECK(any_diff);
  CHECK(std::abs(sum / 200 - 0.5) < 0.1);  // Lebesgue mean
  CHECK(sampler->stationary_cdf(0.3).has_value());
}

TEST_CASE("beta-map sampler burns in at the geometric default") {
  const auto sampler = expanding_map(IntervalMap::beta(2.0));
  CHECK(sampler->burn_in() == 27);  // default_burn_in(1/2)
}

TEST_CASE("default burn-in lengths") {
  CHECK(default_burn_in(0.5) == 27);
  CHECK(default_burn_in(1.0 / 3.0) == 17);
  CHECK(default_burn_in(0.0) == 0);
  CHECK(default_burn_in(1.0) == 0);
}

TEST_CASE("linear process truncates at the declared tail bound") {
  LinearProcessSpec spec;
  spec.rho = 0.5;
  spec.scale = 1.0;
  spec.truncation_tol = 1e-10;
  CHECK(spec.geometric_truncation_length() == 34);

  const auto sampler = linear_process(spec);
  CHECK(sampler->descriptor().find("L=34") != std::string::npos);
  auto cur = sampler->start(7);
  for (int i = 0; i < 100; ++i) {
    const double x = scalar(cur->next());
    CHECK(std::abs(x) <= 2.0 + 1e-12);  // sum |c_k| < scale/(1-rho)
  }

  LinearProcessSpec bad = spec;
  bad.rho = 1.0;
  CHECK_THROWS_AS(linear_process(bad), Error);
}

TEST_CASE("AR(1) sampler: contraction validation and burn-in") {
  CHECK_THROWS_AS(ar_model(1.0, NoiseSpec{}), Error);
  CHECK_THROWS_AS(ar_model(0.5, NoiseSpec{NoiseSpec::Kind::Uniform, -1.0}), Error);

  const auto sampler = ar_model(0.5, NoiseSpec{NoiseSpec::Kind::Uniform, 1.0});
  CHECK(sampler->burn_in() == 27);
  CHECK(sampler->descriptor().find("burn_in=27") != std::string::npos);
  auto cur = sampler->start(3);
  for (int i = 0; i < 100; ++i) {
    CHECK(std::abs(scalar(cur->next())) <= 2.0 + 1e-9);  // half_width/(1-rate)
  }

  const auto third = ar_model(1.0 / 3.0, NoiseSpec{NoiseSpec::Kind::Rademacher, 1.0});
  CHECK(third->burn_in() == 17);
}

TEST_CASE("random-Lipschitz IFS rejects non-contracting systems") {
  try {
    random_lipschitz({{1.2, 0.0}, {0.9, 0.1}}, {0.5, 0.5});
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == "bad_argument");
    CHECK(std::string(e.what()).find("1.05") != std::string::npos);  // measured mean contraction
  }

  const auto sampler = random_lipschitz({{0.5, 0.0}, {0.5, 0.5}});  // Bernoulli convolution
  auto cur = sampler->start(11);
  for (int i = 0; i < 100; ++i) {
    const double x = scalar(cur->next());
    CHECK(x >= -1e-12);
    CHECK(x <= 1.0 + 1e-12);
  }
}

TEST_CASE("subshift sampler emits allowed windows only") {
  Eigen::MatrixXd allowed(2, 2);
  allowed << 1, 1, 1, 0;  // golden-mean shift: no 1->1
  Eigen::MatrixXd p(2, 2);
  p << 0.5, 0.5, 1.0, 0.0;
  const auto sampler = subshift(allowed, doeblin_chain(p), 8);
  auto cur = sampler->start(5);
  for (int i = 0; i < 200; ++i) {
    const auto& w = std::get<SymbolWindow>(cur->next());
    REQUIRE(w.size() == 8);
    for (std::size_t t = 0; t + 1 < w.size(); ++t) {
      CHECK_FALSE((w[t] == 1 && w[t + 1] == 1));
    }
  }

  Eigen::MatrixXd leaky(2, 2);
  leaky << 0.5, 0.5, 0.5, 0.5;
  try {
    subshift(allowed, doeblin_chain(leaky), 8);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("forbidden pair (1,1)") != std::string::npos);
  }
}

TEST_CASE("model sampler emits state indices with the index-space cdf") {
  const FiniteMarkovModel m = two_point_flip(0.25);
  const auto sampler = model_sampler(m);
  auto cur = sampler->start(17);
  int seen[2] = {0, 0};
  for (int i = 0; i < 400; ++i) {
    const double x = scalar(cur->next());
    REQUIRE((x == 0.0 || x == 1.0));
    seen[static_cast<int>(x)]++;
  }
  CHECK(seen[0] > 100);  // both states visited at stationarity
  CHECK(seen[1] > 100);
  CHECK(sampler->stationary_cdf(0.0).value() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(sampler->stationary_cdf(1.0).value() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("iid uniform sampler has the identity cdf") {
  const auto sampler = iid_uniform_sampler();
  CHECK(sampler->stationary_cdf(0.3).value() == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(sampler->stationary_cdf(-1.0).value() == 0.0);
  CHECK(sampler->stationary_cdf(2.0).value() == 1.0);
  auto c1 = sampler->start(1);
  auto c2 = sampler->start(1);
  for (int i = 0; i < 50; ++i) CHECK(scalar(c1->next()) == scalar(c2->next()));
}
