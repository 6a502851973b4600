#include "fourmoment/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <thread>
#include <variant>

#include "fourmoment/numeric.hpp"
#include "fourmoment/rng.hpp"

namespace fourmoment {

namespace {

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("FOURMOMENT_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  return 1;
}

double scalar_state(const SamplerState& state) {
  if (const double* x = std::get_if<double>(&state)) return *x;
  throw Error("bad_argument", "indicator counting needs scalar sampler states");
}

/// Static block partition over replicates; worker(r) fills slot r. Identical
/// output for every thread count because the reduction order is fixed later.
template <typename Worker>
void run_blocks(int reps, int threads, Worker&& worker) {
  auto block = [&worker](int lo, int hi) {
    for (int r = lo; r < hi; ++r) worker(r);
  };
  threads = std::min(threads, reps);
  if (threads <= 1) {
    block(0, reps);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  const int chunk = (reps + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const int lo = t * chunk;
    const int hi = std::min(reps, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back(block, lo, hi);
  }
  for (auto& th : pool) th.join();
}

}  // namespace

MomentReport quartic_bound_terms(const NormProfile& profile, long long n) {
  if (n < 1) throw Error("bad_argument", "bound terms need n >= 1");
  const double logb = std::log(profile.banach + 1.0);
  const double nd = static_cast<double>(n);
  MomentReport r;
  r.n = n;
  r.term1 = nd * profile.phi4_l1 * pow_int(logb, 3);
  r.term2 = nd *
            (profile.phi3_lq + profile.phi2_lq + profile.phi_lq +
             profile.phi_lq * profile.phi_lq) *
            pow_int(logb, 2);
  const double inner = profile.phi2_l1 * logb + profile.phi_lq;
  r.term3 = nd * nd * inner * inner;
  return r;
}

double bounded_quartic_rhs(const NormProfile& profile, long long n) {
  if (n < 1) throw Error("bad_argument", "bound needs n >= 1");
  const double logb = std::log(profile.banach + 1.0);
  const double nd = static_cast<double>(n);
  const double m3 = pow_int(profile.m, 3);
  return m3 * (nd * profile.phi_lq * pow_int(logb, 3) +
               nd * nd * profile.phi_lq * profile.phi_lq * pow_int(logb, 2));
}

int threshold_n0(double theta, double banach) {
  if (!(theta > 0.0 && theta < 1.0)) throw Error("bad_argument", "n0 needs theta in (0,1)");
  if (!(banach > 0.0)) throw Error("bad_argument", "n0 needs a positive norm");
  constexpr int kCap = 10000000;
  double tp = theta;
  int n0 = 1;
  while (tp * banach > 1.0) {
    tp *= theta;
    if (++n0 > kCap) throw Error("cap_exceeded", "n0 exceeds 1e7; gap too close to 1");
  }
  return n0;
}

std::vector<MomentReport> verify_bound(MomentOracle& oracle, const NormProfile& profile,
                                       const std::vector<long long>& ns) {
  if (ns.empty()) throw Error("bad_argument", "bound sweep needs at least one n");
  long long n_max = 0;
  for (long long n : ns) {
    if (n < 1) throw Error("bad_argument", "bound sweep needs n >= 1");
    n_max = std::max(n_max, n);
  }
  const std::vector<double> moments = oracle.fourth_moments(static_cast<int>(n_max));
  std::vector<MomentReport> out;
  out.reserve(ns.size());
  for (long long n : ns) {
    MomentReport r = quartic_bound_terms(profile, n);
    r.lhs = moments[static_cast<std::size_t>(n - 1)];
    r.empirical_K = r.lhs / (r.term1 + r.term2 + r.term3);
    out.push_back(r);
  }
  return out;
}

std::vector<MomentReport> verify_bound(const StationarySampler& sampler, const Observable& phi,
                                       const NormProfile& profile, const BoundOptions& options) {
  if (options.ns.empty()) throw Error("bad_argument", "bound sweep needs at least one n");
  std::vector<MomentReport> out;
  out.reserve(options.ns.size());
  for (long long n : options.ns) {
    McOptions mc = options.mc;
    mc.n = n;
    const McEstimate est = estimate_s4(sampler, phi, mc);
    MomentReport r = quartic_bound_terms(profile, n);
    r.lhs = est.mean;
    r.lhs_std_error = est.std_error;
    r.mc_mode = true;
    r.underpowered = est.underpowered;
    r.empirical_K = (est.mean + 3.0 * est.std_error) / (r.term1 + r.term2 + r.term3);
    out.push_back(r);
  }
  return out;
}

std::string to_string(LedgerCase c) {
  switch (c) {
    case LedgerCase::Case1: return "case1";
    case LedgerCase::Case2: return "case2";
    case LedgerCase::Case3: return "case3";
  }
  return "case1";
}

LedgerReport inequality_ledger(MomentOracle& oracle, const NormProfile& profile,
                               const ErgodicityCertificate& cert, int cutoff) {
  if (cutoff < 1) throw Error("bad_argument", "ledger needs cutoff >= 1");
  const double scale = std::max(1.0, oracle.phi().lpNorm<Eigen::Infinity>());
  if (std::abs(oracle.mean()) > 1e-12 * scale) {
    throw Error("bad_argument", "ledger needs a centered observable");
  }
  if (!cert.covers_closure(oracle.phi(), cutoff)) {
    throw Error("probe_closure_missing",
                "certificate probes do not cover the multiplicative closure of phi up to "
                "cutoff " +
                    std::to_string(cutoff) + "; re-measure kappa with probe_closure set");
  }
  if (cert.horizon() < cutoff) {
    throw Error("probe_closure_missing",
                "certificate horizon " + std::to_string(cert.horizon()) +
                    " is below the ledger cutoff " + std::to_string(cutoff));
  }

  const double c = cert.embedding_c();
  const double kap = cert.kappa();
  const double th = cert.theta();
  const double b = profile.banach;
  auto decay = [&](int e) { return e == 0 ? 1.0 : kap * theta_pow(th, e); };
  auto cov_cap = [&](int k) {
    return k == 0 ? profile.phi2_l1 : c * kap * profile.phi_lq * theta_pow(th, k) * b;
  };

  LedgerReport report;
  report.cutoff = cutoff;
  report.n0 = threshold_n0(th, b);
  report.theta_n0_check = theta_pow(th, report.n0) * b <= 1.0;
  report.aggregate_from = 2 * report.n0 - 1;

  double min_slack = std::numeric_limits<double>::infinity();
  auto push = [&](LedgerCase tag, int i, int j, int k, double lhs, double bound,
                  const char* name) {
    LedgerEntry e;
    e.case_tag = tag;
    e.i = i;
    e.j = j;
    e.k = k;
    e.lhs = lhs;
    e.bound = bound;
    e.slack = bound - lhs;
    e.inequality = name;
    min_slack = std::min(min_slack, e.slack);
    report.entries.push_back(std::move(e));
  };

  std::vector<double> max_i_per_j(static_cast<std::size_t>(cutoff) + 1, 0.0);
  for (int i = 0; i <= cutoff; ++i) {
    for (int j = 0; j <= cutoff; ++j) {
      for (int k = 0; k <= cutoff; ++k) {
        const double m = oracle.cross_moment(i, j, k);
        const double am = std::abs(m);
        push(LedgerCase::Case1, i, j, k, am, profile.phi4_l1, "cas1.1");
        if (k >= 1 && i <= k && j <= k) {
          push(LedgerCase::Case1, i, j, k, am,
               profile.phi3_lq * c * kap * theta_pow(th, k) * b, "cas1.2");
        }
        if (j >= 1 && i <= j && k <= j) {
          const double rem = std::abs(oracle.case2_remainder(i, j, k));
          max_i_per_j[static_cast<std::size_t>(j)] =
              std::max(max_i_per_j[static_cast<std::size_t>(j)], rem);
          push(LedgerCase::Case2, i, j, k, rem,
               c * profile.phi2_lq * kap * theta_pow(th, j) * decay(k) * b * b, "I-bound");
        }
        if (i >= 1 && j <= i && k <= i) {
          push(LedgerCase::Case3, i, j, k, am,
               c * kap * theta_pow(th, i) * profile.phi_lq * b *
                   (decay(j) * decay(k) * b * b + cov_cap(k)),
               "cas3.1+3.2");
        }
      }
    }
  }

  for (int g = 1; g <= cutoff; ++g) {
    const double cov = std::abs(oracle.covariance(g));
    push(LedgerCase::Case2, 0, g, 0, cov, c * kap * profile.phi_lq * theta_pow(th, g) * b,
         "cov-geo");
    push(LedgerCase::Case2, 0, g, 0, cov, profile.phi2_l1, "cov-holder");
  }
  report.min_slack = min_slack;

  CompensatedSum agg;
  for (int j = std::max(1, report.aggregate_from); j <= cutoff; ++j) {
    agg.add(static_cast<double>(j) * static_cast<double>(j) *
            max_i_per_j[static_cast<std::size_t>(j)]);
  }
  report.aggregate_case2 = agg.value();
  report.aggregate_note =
      "j^2 multiplicity stands in for the elided inner (i,k) sum; reported for scale, not "
      "certified";
  if (report.aggregate_from > cutoff) {
    report.aggregate_note += "; aggregation window [2 n0 - 1, cutoff] is empty";
  }

  CompensatedSum decomp;
  for (int i = 0; i <= cutoff; ++i) {
    for (int j = 0; i + j <= cutoff; ++j) {
      for (int k = 0; i + j + k <= cutoff; ++k) {
        decomp.add(std::abs(oracle.cross_moment(i, j, k)));
      }
    }
  }
  report.decomposition_bound_at_cutoff = 24.0 * (cutoff + 1) * decomp.value();
  report.exact_s4_at_cutoff = oracle.fourth_moment(cutoff + 1);
  return report;
}

CltDiagnostics clt_check(const StationarySampler& sampler, const Observable& phi,
                         double sigma2, const CltOptions& options) {
  if (options.certificate_p && *options.certificate_p < 2.0) {
    throw Error("exponent_mismatch",
                "certificate moment order p < 2 cannot normalize the CLT");
  }
  if (!(sigma2 > 0.0)) throw Error("degenerate", "sigma^2 <= 0: no CLT normalization");
  if (options.n < 1) throw Error("bad_argument", "CLT check needs n >= 1");
  if (options.reps < 100) throw Error("bad_argument", "CLT check needs reps >= 100");

  const double denom = std::sqrt(sigma2) * std::sqrt(static_cast<double>(options.n));
  std::vector<double> zs(static_cast<std::size_t>(options.reps), 0.0);
  run_blocks(options.reps, resolve_threads(options.threads), [&](int r) {
    auto cursor = sampler.start(replicate_seed(options.seed, r));
    CompensatedSum s;
    for (long long t = 0; t < options.n; ++t) s.add(phi.eval(cursor->next()));
    zs[static_cast<std::size_t>(r)] = s.value() / denom;
  });

  const SampleMoments stats = sample_moments(zs);
  CltDiagnostics out;
  out.n = options.n;
  out.reps = options.reps;
  out.sigma2 = sigma2;
  out.mean = stats.mean;
  out.variance = stats.variance;
  out.skewness = stats.skewness;
  out.kurtosis = stats.kurtosis;
  out.ks_distance = ks_distance_to_normal(std::move(zs));
  return out;
}

CltDiagnostics clt_check(const FiniteMarkovModel& model, const Observable& phi,
                         double kappa, double theta, const CltOptions& options) {
  const Observable centered = center(phi.discretized(model), model);
  MomentOracle oracle(model, centered);
  const GreenKubo gk = green_kubo_sigma2(oracle, kappa, theta);
  const auto sampler = model_sampler(model);
  return clt_check(*sampler, centered, gk.sigma2, options);
}

TightnessReport empirical_tightness(const StationarySampler& sampler,
                                    const std::vector<std::pair<double, double>>& grid,
                                    const McOptions& options) {
  std::vector<double> ps;
  ps.reserve(grid.size());
  for (const auto& [lo, hi] : grid) {
    const auto chi = sampler.stationary_cdf(hi);
    const auto clo = sampler.stationary_cdf(lo);
    if (!chi || !clo) {
      throw Error("bad_argument",
                  "sampler has no closed-form stationary CDF; pass cell probabilities");
    }
    ps.push_back(*chi - *clo);
  }
  return empirical_tightness(sampler, grid, ps, options);
}

TightnessReport empirical_tightness(const StationarySampler& sampler,
                                    const std::vector<std::pair<double, double>>& grid,
                                    const std::vector<double>& cell_probabilities,
                                    const McOptions& options) {
  if (grid.empty()) throw Error("bad_argument", "tightness needs a non-empty grid");
  if (cell_probabilities.size() != grid.size()) {
    throw Error("bad_argument", "one probability per grid cell required");
  }
  if (options.reps < 100) throw Error("bad_argument", "tightness needs reps >= 100");
  if (options.n < 1) throw Error("bad_argument", "tightness needs n >= 1");
  for (std::size_t cidx = 0; cidx < grid.size(); ++cidx) {
    if (!(grid[cidx].second > grid[cidx].first)) {
      throw Error("bad_argument", "tightness cells need hi > lo");
    }
    if (!(cell_probabilities[cidx] >= 0.0 && cell_probabilities[cidx] <= 1.0)) {
      throw Error("bad_argument", "cell probability must be in [0,1]");
    }
  }

  const std::size_t cells = grid.size();
  const std::size_t reps = static_cast<std::size_t>(options.reps);
  // One trajectory per replicate feeds every cell; slot r*cells+c holds the
  // fourth power of the centered count for cell c.
  std::vector<double> fourth(reps * cells, 0.0);
  run_blocks(options.reps, resolve_threads(options.threads), [&](int r) {
    auto cursor = sampler.start(replicate_seed(options.seed, r));
    std::vector<double> counts(cells, 0.0);
    for (long long t = 0; t < options.n; ++t) {
      const double x = scalar_state(cursor->next());
      for (std::size_t cidx = 0; cidx < cells; ++cidx) {
        if (x > grid[cidx].first && x <= grid[cidx].second) counts[cidx] += 1.0;
      }
    }
    for (std::size_t cidx = 0; cidx < cells; ++cidx) {
      const double d = counts[cidx] - static_cast<double>(options.n) * cell_probabilities[cidx];
      const double d2 = d * d;
      fourth[static_cast<std::size_t>(r) * cells + cidx] = d2 * d2;
    }
  });

  TightnessReport report;
  report.rows.reserve(cells);
  const double nd = static_cast<double>(options.n);
  for (std::size_t cidx = 0; cidx < cells; ++cidx) {
    std::vector<double> column(reps, 0.0);
    for (std::size_t r = 0; r < reps; ++r) column[r] = fourth[r * cells + cidx];
    const SampleMoments stats = sample_moments(column);
    TightnessRow row;
    row.lo = grid[cidx].first;
    row.hi = grid[cidx].second;
    row.p = cell_probabilities[cidx];
    row.moment = stats.mean;
    row.std_error = std::sqrt(std::max(stats.variance, 0.0) / static_cast<double>(reps));
    const double delta = row.hi - row.lo;
    row.budget = nd * delta + nd * nd * delta * delta;
    row.ratio = row.budget > 0.0 ? row.moment / row.budget : 0.0;
    row.underpowered = row.std_error > 0.5 * std::abs(row.moment);
    report.rows.push_back(row);
    report.fitted_C = std::max(report.fitted_C, row.ratio);
  }
  return report;
}

}  // namespace fourmoment
