#include "fourmoment/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

#include "fourmoment/numeric.hpp"
#include "fourmoment/rng.hpp"

namespace fourmoment {

namespace {

constexpr double kFloor = 1e-15;  // theta/kappa floor for effectively i.i.d. chains

// Residuals below this (relative to ||f||) are indistinguishable from zero in
// double precision; ratios against theta^n there measure roundoff, not decay.
constexpr double kResidualFloor = 1e-12;

std::vector<int> bfs_levels(const Eigen::MatrixXd& p, bool transpose) {
  const int s = static_cast<int>(p.rows());
  std::vector<int> level(s, -1);
  std::queue<int> q;
  level[0] = 0;
  q.push(0);
  while (!q.empty()) {
    const int u = q.front();
    q.pop();
    for (int v = 0; v < s; ++v) {
      const double w = transpose ? p(v, u) : p(u, v);
      if (w > 0.0 && level[v] < 0) {
        level[v] = level[u] + 1;
        q.push(v);
      }
    }
  }
  return level;
}

void check_ergodic_structure(const Eigen::MatrixXd& p) {
  const auto fwd = bfs_levels(p, false);
  if (std::find(fwd.begin(), fwd.end(), -1) != fwd.end()) {
    throw Error("not_strongly_ergodic", "not strongly ergodic: chain is reducible (unreachable state)");
  }
  const auto bwd = bfs_levels(p, true);
  if (std::find(bwd.begin(), bwd.end(), -1) != bwd.end()) {
    throw Error("not_strongly_ergodic", "not strongly ergodic: chain is reducible (non-returning state)");
  }
  // Period of a strongly connected graph: gcd over edges of level(u)+1-level(v).
  const int s = static_cast<int>(p.rows());
  long long g = 0;
  for (int u = 0; u < s; ++u) {
    for (int v = 0; v < s; ++v) {
      if (p(u, v) > 0.0) {
        g = std::gcd(g, static_cast<long long>(std::abs(fwd[u] + 1 - fwd[v])));
      }
    }
  }
  if (g != 1) {
    throw Error("not_strongly_ergodic",
                "not strongly ergodic: chain is periodic (period " + std::to_string(g) + ")");
  }
}

}  // namespace

Eigen::VectorXd stationary(const FiniteMarkovModel& model) {
  const Eigen::MatrixXd& p = model.transition();
  const int s = model.size();
  check_ergodic_structure(p);
  if (s == 1) return Eigen::VectorXd::Ones(1);

  // (P^T - I) nu = 0 with the last equation replaced by sum(nu) = 1.
  Eigen::MatrixXd a = p.transpose() - Eigen::MatrixXd::Identity(s, s);
  a.row(s - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(s);
  rhs[s - 1] = 1.0;
  Eigen::VectorXd nu = a.partialPivLu().solve(rhs);

  for (int i = 0; i < s; ++i) nu[i] = std::max(nu[i], 0.0);
  const double total = nu.sum();
  if (!(total > 0.0)) throw Error("no_convergence", "stationary solve produced no mass");
  nu /= total;

  const double residual = (p.transpose() * nu - nu).lpNorm<1>();
  if (residual > 1e-10) {
    throw Error("no_convergence",
                "stationary solve residual " + std::to_string(residual) + " exceeds 1e-10");
  }
  return nu;
}

SpectralGapEstimate subdominant_modulus(const FiniteMarkovModel& model, double tol,
                                        int max_iterations, std::uint64_t restart_seed) {
  const Eigen::MatrixXd& p = model.transition();
  const int s = model.size();
  const Eigen::VectorXd nu = model.has_stationary() ? model.stationary() : stationary(model);

  SpectralGapEstimate out;
  if (s == 1) return out;

  // Deflated operator A = P - 1 nu^T, applied matrix-free; spec(A) = spec(P) \ {1} + {0}.
  const auto apply = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    return p * x - Eigen::VectorXd::Constant(s, nu.dot(x));
  };

  SplitMix64 rng(restart_seed);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(s);
  u[0] = 1.0;
  double prev_estimate = -1.0;

  for (int it = 1; it <= max_iterations; ++it) {
    out.iterations = it;
    const Eigen::VectorXd a = apply(u);
    const double na = a.norm();
    if (na < 1e-250) {  // A annihilates u (and generically everything): no second mode
      out.theta = 0.0;
      out.residual = 0.0;
      break;
    }
    const Eigen::VectorXd b = apply(a);

    // Real dominant mode: a is collinear with u.
    const double lambda = u.dot(a);
    const double rank1_residual = (a - lambda * u).norm() / na;
    if (rank1_residual <= tol) {
      out.theta = std::abs(lambda);
      out.residual = rank1_residual;
      out.complex_pair = false;
      break;
    }

    // Two-lag quadratic fit: least-squares beta, gamma with b + beta a + gamma u ~ 0,
    // so the dominant modes solve mu^2 + beta mu + gamma = 0 (handles conjugate pairs).
    const double aa = a.dot(a), au = a.dot(u), uu = u.dot(u);
    const double ab = a.dot(b), ub = u.dot(b);
    const double det = aa * uu - au * au;
    double estimate = na / u.norm();  // fallback: plain power ratio
    bool complex_pair = false;
    double fit_residual = 1.0;
    if (std::abs(det) > 1e-300) {
      const double beta = -(ab * uu - ub * au) / det;
      const double gamma = -(aa * ub - au * ab) / det;
      const double disc = beta * beta - 4.0 * gamma;
      if (disc >= 0.0) {
        const double r = std::sqrt(disc);
        estimate = std::max(std::abs((-beta + r) / 2.0), std::abs((-beta - r) / 2.0));
        complex_pair = false;
      } else {
        estimate = std::sqrt(std::max(gamma, 0.0));
        complex_pair = true;
      }
      fit_residual = (b + beta * a + gamma * u).norm() / std::max(b.norm(), 1e-300);
    }

    if (fit_residual <= tol && std::abs(estimate - prev_estimate) <= tol * std::max(1.0, estimate)) {
      out.theta = estimate;
      out.residual = fit_residual;
      out.complex_pair = complex_pair;
      break;
    }
    prev_estimate = estimate;
    out.theta = estimate;
    out.residual = fit_residual;
    out.complex_pair = complex_pair;

    const double nb = b.norm();
    if (nb < 1e-250 || it % 500 == 0) {
      // Stagnation or annihilation: restart from a seeded random direction.
      for (int i = 0; i < s; ++i) u[i] = rng.uniform01() - 0.5;
      u.normalize();
    } else {
      u = b / nb;
    }
    if (it == max_iterations) {
      throw Error("no_convergence", "power iteration did not converge (last estimate " +
                                        std::to_string(estimate) + ")");
    }
  }

  if (out.theta >= 1.0 - 1e-12) {
    throw Error("no_spectral_gap",
                "no spectral gap detected (theta=" + std::to_string(out.theta) + ")");
  }
  out.theta = std::max(out.theta, kFloor);
  return out;
}

namespace {

struct ProbeSet {
  std::vector<Eigen::VectorXd> probes;
  std::vector<std::string> names;
};

ProbeSet build_probes(const FiniteMarkovModel& model, const CertificateRequest& request) {
  const int s = model.size();
  ProbeSet out;
  for (int i = 0; i < s; ++i) {  // coordinate indicators are always probed
    out.probes.push_back(Eigen::VectorXd::Unit(s, i));
    out.names.push_back("e" + std::to_string(i));
  }
  for (std::size_t i = 0; i < request.probes.size(); ++i) {
    if (request.probes[i].size() != s) throw Error("bad_argument", "probe size does not match model");
    out.probes.push_back(request.probes[i]);
    out.names.push_back(i < request.probe_names.size() ? request.probe_names[i]
                                                       : "probe" + std::to_string(i));
  }
  if (request.probe_closure.has_value()) {
    const Eigen::VectorXd& phi = request.probe_closure->first;
    const int cutoff = request.probe_closure->second;
    if (phi.size() != s) throw Error("bad_argument", "closure observable size does not match model");
    const Eigen::MatrixXd& p = model.transition();
    // g_k = phi . (P^k phi) and h_{j,k} = phi . P^j(g_k), j,k = 0..cutoff.
    Eigen::VectorXd pk = phi;
    for (int k = 0; k <= cutoff; ++k) {
      if (k > 0) pk = p * pk;
      const Eigen::VectorXd gk = phi.cwiseProduct(pk);
      out.probes.push_back(gk);
      out.names.push_back("phi.P^" + std::to_string(k) + "phi");
      Eigen::VectorXd pj = gk;
      for (int j = 0; j <= cutoff; ++j) {
        if (j > 0) pj = p * pj;
        out.probes.push_back(phi.cwiseProduct(pj));
        out.names.push_back("phi.P^" + std::to_string(j) + "(phi.P^" + std::to_string(k) + "phi)");
      }
    }
    out.probes.push_back(phi);
    out.names.push_back("phi");
  }
  return out;
}

double sup_norm(const Eigen::VectorXd& v) { return v.lpNorm<Eigen::Infinity>(); }

}  // namespace

ErgodicityCertificate theta_kappa(const FiniteMarkovModel& model, const CertificateRequest& request) {
  if (request.norm != NormKind::Sup) {
    throw Error("bad_argument", "certificates are measured in the sup norm only");
  }
  if (request.horizon < 2) throw Error("bad_argument", "certificate horizon must be >= 2");
  FiniteMarkovModel m = model;
  if (!m.has_stationary()) m.attach_stationary(stationary(m));
  const Eigen::VectorXd& nu = m.stationary();
  const Eigen::MatrixXd& p = m.transition();

  int horizon = request.horizon;
  if (request.probe_closure.has_value()) {
    horizon = std::max(horizon, request.probe_closure->second);
  }

  const ProbeSet set = build_probes(m, request);
  const SpectralGapEstimate gap = subdominant_modulus(m);
  const double theta = gap.theta;

  double kappa = 0.0;
  for (const Eigen::VectorXd& f : set.probes) {
    const double nf = sup_norm(f);
    if (nf <= 0.0) continue;
    const double mean = nu.dot(f);
    Eigen::VectorXd iter = f;
    double tp = 1.0;
    for (int n = 1; n <= horizon; ++n) {
      iter = p * iter;
      tp *= theta;  // same repeated product the ledger uses
      const double decay = sup_norm(iter - Eigen::VectorXd::Constant(m.size(), mean));
      // Sup-norm decay of centered functions is monotone under a stochastic P,
      // so once the residual reaches machine noise every later ratio is noise.
      if (decay <= kResidualFloor * nf) break;
      kappa = std::max(kappa, decay / (tp * nf));
    }
  }
  kappa = std::max(kappa, kFloor);

  ErgodicityCertificate cert(kappa, theta, request.p, 1.0, 1.0, horizon, set.names);
  if (request.probe_closure.has_value()) {
    cert.record_closure(request.probe_closure->first, request.probe_closure->second);
  }
  return cert;
}

DecayDiagnostic decay_rate_diagnostic(const FiniteMarkovModel& model,
                                      const CertificateRequest& request) {
  FiniteMarkovModel m = model;
  if (!m.has_stationary()) m.attach_stationary(stationary(m));
  const Eigen::VectorXd& nu = m.stationary();
  const Eigen::MatrixXd& p = m.transition();
  const ProbeSet set = build_probes(m, request);

  DecayDiagnostic out;
  out.horizon_ratio.assign(static_cast<std::size_t>(std::max(request.horizon, 1)), 0.0);
  for (const Eigen::VectorXd& f : set.probes) {
    const double nf = sup_norm(f);
    if (nf <= 0.0) continue;
    const double mean = nu.dot(f);
    Eigen::VectorXd iter = f;
    for (int n = 1; n <= request.horizon; ++n) {
      iter = p * iter;
      const double ratio = sup_norm(iter - Eigen::VectorXd::Constant(m.size(), mean)) / nf;
      out.horizon_ratio[static_cast<std::size_t>(n - 1)] =
          std::max(out.horizon_ratio[static_cast<std::size_t>(n - 1)], ratio);
    }
  }
  const ErgodicityCertificate cert = theta_kappa(m, request);
  out.kappa = cert.kappa();
  out.theta = cert.theta();
  return out;
}

FiniteMarkovModel ulam(const IntervalMap& map, const UlamOptions& options) {
  const int k = options.cells;
  if (k < 2) throw Error("bad_argument", "Ulam discretization needs at least 2 cells");
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(k, k);

  if (map.piecewise_linear()) {
    // Exact interval intersections branch by branch.
    const std::vector<MapBranch> branches = map.linear_branches();
    for (int i = 0; i < k; ++i) {
      const double cell_lo = static_cast<double>(i) / k;
      const double cell_hi = static_cast<double>(i + 1) / k;
      for (const MapBranch& b : branches) {
        const double lo = std::max(cell_lo, b.lo);
        const double hi = std::min(cell_hi, b.hi);
        if (hi <= lo) continue;
        const double y0 = b.slope * lo + b.intercept;
        const double y1 = b.slope * hi + b.intercept;
        const int j_lo = std::max(0, static_cast<int>(std::floor(y0 * k)));
        const int j_hi = std::min(k - 1, static_cast<int>(std::floor(std::nextafter(y1 * k, 0.0))));
        for (int j = j_lo; j <= j_hi; ++j) {
          const double seg_lo = std::max(y0, static_cast<double>(j) / k);
          const double seg_hi = std::min(y1, static_cast<double>(j + 1) / k);
          if (seg_hi > seg_lo) u(i, j) += (seg_hi - seg_lo) * k / b.slope;
        }
      }
    }
  } else {
    if (options.samples_per_cell < 1) {
      throw Error("bad_argument", "stratified Ulam sampling needs samples_per_cell >= 1");
    }
    // Deterministic stratified midpoints within each cell.
    const double w = 1.0 / options.samples_per_cell;
    for (int i = 0; i < k; ++i) {
      for (int t = 0; t < options.samples_per_cell; ++t) {
        const double x = (static_cast<double>(i) + (t + 0.5) * w) / k;
        const double y = map.apply(x);
        const int j = std::min(k - 1, std::max(0, static_cast<int>(std::floor(y * k))));
        u(i, j) += w;
      }
    }
  }

  for (int i = 0; i < k; ++i) {  // exact row normalization absorbs float drift
    const double total = u.row(i).sum();
    if (!(total > 0.0)) {
      throw Error("degenerate", "Ulam row " + std::to_string(i) + " received no image mass");
    }
    u.row(i) /= total;
  }

  Eigen::VectorXd coords(k);
  for (int i = 0; i < k; ++i) coords[i] = (static_cast<double>(i) + 0.5) / k;
  FiniteMarkovModel model({}, std::move(u), std::nullopt, std::move(coords));
  model.attach_stationary(stationary(model));
  return model;
}

}  // namespace fourmoment
