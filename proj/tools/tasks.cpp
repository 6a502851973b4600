#include "tasks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "builders.hpp"
#include "fourmoment/oracle.hpp"
#include "fourmoment/spectral.hpp"
#include "fourmoment/verify.hpp"

namespace fourmoment::cli {

namespace {

const Json& field(const Json& cfg, const char* name) {
  if (!cfg.is_object() || !cfg.contains(name)) {
    throw Error("schema", std::string("config needs field '") + name + "'");
  }
  return cfg.at(name);
}

double num_or(const Json& j, const char* name, double fallback) {
  if (!j.is_object() || !j.contains(name)) return fallback;
  if (!j.at(name).is_number()) throw Error("schema", std::string("field '") + name + "' must be a number");
  return j.at(name).get<double>();
}

long long ll_or(const Json& j, const char* name, long long fallback) {
  if (!j.is_object() || !j.contains(name)) return fallback;
  if (!j.at(name).is_number_integer()) throw Error("schema", std::string("field '") + name + "' must be an integer");
  return j.at(name).get<long long>();
}

int int_or(const Json& j, const char* name, int fallback) {
  return static_cast<int>(ll_or(j, name, fallback));
}

std::string str_or(const Json& j, const char* name, const std::string& fallback) {
  if (!j.is_object() || !j.contains(name)) return fallback;
  if (!j.at(name).is_string()) throw Error("schema", std::string("field '") + name + "' must be a string");
  return j.at(name).get<std::string>();
}

bool bool_or(const Json& j, const char* name, bool fallback) {
  if (!j.is_object() || !j.contains(name)) return fallback;
  if (!j.at(name).is_boolean()) throw Error("schema", std::string("field '") + name + "' must be a boolean");
  return j.at(name).get<bool>();
}

std::vector<long long> ll_list(const Json& j, const char* name) {
  const Json& arr = field(j, name);
  if (!arr.is_array() || arr.empty()) throw Error("schema", std::string("field '") + name + "' must be a non-empty array");
  std::vector<long long> out;
  for (const Json& v : arr) {
    if (!v.is_number_integer()) throw Error("schema", std::string("field '") + name + "' entries must be integers");
    out.push_back(v.get<long long>());
  }
  return out;
}

std::vector<double> num_list(const Json& j, const char* name) {
  const Json& arr = field(j, name);
  if (!arr.is_array() || arr.empty()) throw Error("schema", std::string("field '") + name + "' must be a non-empty array");
  std::vector<double> out;
  for (const Json& v : arr) {
    if (!v.is_number()) throw Error("schema", std::string("field '") + name + "' entries must be numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

/// Build the observable for a finite-model task: discretize, optionally center.
Observable model_observable(const Json& obs_json, const FiniteMarkovModel& model, bool center_it) {
  Observable obs = build_observable(obs_json).discretized(model);
  return center_it ? center(obs, model) : obs;
}

double binomial_mu4(long long n, double p) {
  const double pq = p * (1.0 - p);
  return static_cast<double>(n) * pq * (1.0 + 3.0 * static_cast<double>(n - 2) * pq);
}

// ---------------------------------------------------------------------------

TaskOutput task_spectral(const Json& cfg) {
  TaskOutput out;
  out.checks = Json::object();
  const Json& systems = field(cfg, "systems");
  if (!systems.is_array() || systems.empty()) throw Error("schema", "spectral task needs systems");
  const int horizon = int_or(cfg, "horizon", 64);

  Json rows = Json::array();
  std::vector<double> thetas;
  for (std::size_t idx = 0; idx < systems.size(); ++idx) {
    const Json& entry = systems[idx];
    const std::string label = str_or(entry, "label", "s" + std::to_string(idx));
    const SystemBundle bundle = build_system(field(entry, "system"));
    const FiniteMarkovModel& model = require_model(bundle);
    const SpectralGapEstimate est = subdominant_modulus(model);
    CertificateRequest req;
    req.horizon = horizon;
    const ErgodicityCertificate cert = theta_kappa(model, req);
    thetas.push_back(est.theta);

    Json row;
    row["label"] = label;
    row["gap_estimate"] = json_of(est);
    row["certificate"] = json_of(cert);
    rows.push_back(std::move(row));
    if (entry.contains("expect_theta")) {
      const double expect = num_or(entry, "expect_theta", 0.0);
      const double tol = num_or(entry, "tol", 1e-10);
      out.checks["theta_" + label] = std::abs(est.theta - expect) <= tol;
    }
  }
  out.results["systems"] = std::move(rows);

  if (cfg.contains("pairs")) {
    Json pairs = Json::array();
    const Json& spec = cfg.at("pairs");
    for (std::size_t idx = 0; idx < spec.size(); ++idx) {
      const Json& pr = spec[idx];
      const auto a = static_cast<std::size_t>(ll_or(pr, "a", 0));
      const auto b = static_cast<std::size_t>(ll_or(pr, "b", 0));
      if (a >= thetas.size() || b >= thetas.size()) throw Error("schema", "pair index out of range");
      const double diff = std::abs(thetas[a] - thetas[b]);
      const double tol = num_or(pr, "tol", 1e-6);
      out.checks["theta_pair_" + std::to_string(idx)] = diff <= tol;
      Json row;
      row["a"] = a;
      row["b"] = b;
      row["diff"] = diff;
      pairs.push_back(std::move(row));
    }
    out.results["pairs"] = std::move(pairs);
  }
  return out;
}

TaskOutput task_oracle_s4(const Json& cfg) {
  TaskOutput out;
  out.checks = Json::object();
  const SystemBundle bundle = build_system(field(cfg, "system"));
  const FiniteMarkovModel& model = require_model(bundle);
  const Observable phi = model_observable(field(cfg, "observable"), model, bool_or(cfg, "center", false));

  std::vector<long long> ns;
  if (cfg.contains("ns")) {
    ns = ll_list(cfg, "ns");
  } else {
    const long long n_max = ll_or(cfg, "n_max", 0);
    if (n_max < 1) throw Error("schema", "oracle_s4 needs ns or n_max >= 1");
    for (long long n = 1; n <= n_max; ++n) ns.push_back(n);
  }
  long long n_max = 0;
  for (long long n : ns) {
    if (n < 1) throw Error("schema", "oracle_s4 ns must be >= 1");
    n_max = std::max(n_max, n);
  }

  MomentOracle oracle(model, phi);
  const std::vector<double> moments = oracle.fourth_moments(static_cast<int>(n_max));

  Json rows = Json::array();
  std::string csv = "n,exact_s4\n";
  for (long long n : ns) {
    const double v = moments[static_cast<std::size_t>(n - 1)];
    Json row;
    row["n"] = n;
    row["exact_s4"] = v;
    rows.push_back(std::move(row));
    csv += std::to_string(n) + "," + Json(v).dump() + "\n";
  }
  out.results["moments"] = std::move(rows);
  out.csv = std::move(csv);

  const std::string closed_form = str_or(cfg, "closed_form", "");
  if (closed_form == "rademacher") {
    const double rel_tol = num_or(cfg, "rel_tol", 1e-9);
    double max_rel = 0.0;
    for (long long n : ns) {
      const double target = 3.0 * static_cast<double>(n) * static_cast<double>(n) - 2.0 * static_cast<double>(n);
      const double v = moments[static_cast<std::size_t>(n - 1)];
      max_rel = std::max(max_rel, std::abs(v - target) / target);
    }
    out.results["closed_form_max_rel_err"] = max_rel;
    out.checks["closed_form"] = max_rel <= rel_tol;
  } else if (!closed_form.empty()) {
    throw Error("schema", "unknown closed_form reference: " + closed_form);
  }
  return out;
}

TaskOutput task_oracle_consistency(const Json& cfg) {
  TaskOutput out;
  out.checks = Json::object();
  const Json& cases = field(cfg, "cases");
  if (!cases.is_array() || cases.empty()) throw Error("schema", "oracle_consistency needs cases");
  const int n_max = int_or(cfg, "n_max", 8);
  const double rel_tol = num_or(cfg, "rel_tol", 1e-12);

  Json rows = Json::array();
  for (std::size_t idx = 0; idx < cases.size(); ++idx) {
    const Json& entry = cases[idx];
    const std::string label = str_or(entry, "label", "c" + std::to_string(idx));
    const SystemBundle bundle = build_system(field(entry, "system"));
    const FiniteMarkovModel& model = require_model(bundle);
    const Observable phi = model_observable(field(entry, "observable"), model, true);
    MomentOracle oracle(model, phi);
    double max_rel = 0.0;
    for (int n = 1; n <= n_max; ++n) {
      const double gap = oracle.fourth_moment(n);
      const double brute = enumerate_fourth_moment(model, phi, n);
      const double rel = std::abs(gap - brute) / std::max({std::abs(gap), std::abs(brute), 1e-30});
      max_rel = std::max(max_rel, rel);
      Json row;
      row["case"] = label;
      row["n"] = n;
      row["gap_expansion"] = gap;
      row["enumeration"] = brute;
      row["rel_err"] = rel;
      rows.push_back(std::move(row));
    }
    out.checks["gap_vs_enumeration_" + label] = max_rel <= rel_tol;
  }
  out.results["rows"] = std::move(rows);
  return out;
}

TaskOutput task_mc_s4(const Json& cfg) {
  TaskOutput out;
  const SystemBundle bundle = build_system(field(cfg, "system"));
  Observable phi = build_observable(field(cfg, "observable"));
  const bool center_it = bool_or(cfg, "center", false);
  if (bundle.model) {
    phi = model_observable(field(cfg, "observable"), *bundle.model, center_it);
  } else if (center_it) {
    throw Error("bad_argument", "centering needs a finite model; supply a centered observable");
  }
  McOptions mc;
  mc.n = ll_or(cfg, "n", 0);
  mc.reps = int_or(cfg, "reps", 100);
  mc.seed = seed_of(cfg);
  const McEstimate est = estimate_s4(*bundle.sampler, phi, mc);
  out.results["estimate"] = json_of(est);
  out.checks["powered"] = !est.underpowered;
  return out;
}

TaskOutput task_bound(const Json& cfg) {
  TaskOutput out;
  out.checks = Json::object();
  const Json& cases = field(cfg, "cases");
  if (!cases.is_array() || cases.empty()) throw Error("schema", "bound task needs cases");
  const std::vector<long long> ns = ll_list(cfg, "ns");
  const double q = num_or(cfg, "q", 2.0);
  const std::string mode = str_or(cfg, "mode", "exact");
  if (mode != "exact" && mode != "mc") throw Error("schema", "bound mode must be exact or mc");

  Json case_rows = Json::array();
  std::string single_csv;
  for (std::size_t idx = 0; idx < cases.size(); ++idx) {
    const Json& entry = cases[idx];
    const std::string label = str_or(entry, "label", "c" + std::to_string(idx));
    const SystemBundle bundle = build_system(field(entry, "system"));
    const FiniteMarkovModel& model = require_model(bundle);
    const Observable phi = model_observable(field(entry, "observable"), model, true);
    const NormProfile profile = norm_profile(phi, model, q);

    std::vector<MomentReport> reports;
    if (mode == "exact") {
      MomentOracle oracle(model, phi);
      reports = verify_bound(oracle, profile, ns);
    } else {
      BoundOptions opts;
      opts.ns = ns;
      opts.mc.reps = int_or(cfg, "reps", 2000);
      opts.mc.seed = seed_of(cfg);
      reports = verify_bound(*bundle.sampler, phi, profile, opts);
    }

    bool finite = true;
    bool powered = true;
    double max_k = 0.0;
    Json report_rows = Json::array();
    for (const MomentReport& r : reports) {
      finite = finite && std::isfinite(r.empirical_K);
      powered = powered && !r.underpowered;
      max_k = std::max(max_k, r.empirical_K);
      report_rows.push_back(json_of(r));
    }
    out.checks["finite_" + label] = finite;
    if (mode == "mc") out.checks["powered_" + label] = powered;

    if (cfg.contains("stabilize")) {
      const Json& st = cfg.at("stabilize");
      const long long early = ll_or(st, "early", 32);
      const long long late = ll_or(st, "late", 64);
      const double rel = num_or(st, "rel", 0.05);
      double max_early = 0.0;
      double max_late = 0.0;
      for (const MomentReport& r : reports) {
        if (r.n >= early) max_early = std::max(max_early, r.empirical_K);
        if (r.n >= late) max_late = std::max(max_late, r.empirical_K);
      }
      out.checks["stabilized_" + label] =
          max_early > 0.0 && (max_early - max_late) <= rel * max_early;
    }

    Json row;
    row["label"] = label;
    row["profile"] = json_of(profile);
    row["reports"] = std::move(report_rows);
    row["max_empirical_K"] = max_k;
    case_rows.push_back(std::move(row));
    if (cases.size() == 1) single_csv = bound_sweep_csv(reports);
  }
  out.results["cases"] = std::move(case_rows);
  out.csv = std::move(single_csv);
  return out;
}

TaskOutput task_hat_sweep(const Json& cfg) {
  TaskOutput out;
  const SystemBundle bundle = build_system(field(cfg, "system"));
  const FiniteMarkovModel& model = require_model(bundle);
  const std::vector<double> cell = num_list(cfg, "cell");
  if (cell.size() != 2 || !(cell[1] > cell[0])) throw Error("schema", "hat_sweep cell must be [lo, hi]");
  const std::vector<double> ramps = num_list(cfg, "ramps");
  const double q = num_or(cfg, "q", 2.0);
  const long long n = ll_or(cfg, "n", 256);
  const double k_span_max = num_or(cfg, "k_span_max", 10.0);

  BoundOptions opts;
  opts.ns = {n};
  opts.mc.reps = int_or(cfg, "reps", 20000);
  opts.mc.seed = seed_of(cfg);

  Json rows = Json::array();
  double k_min = std::numeric_limits<double>::infinity();
  double k_max = 0.0;
  double b_min = std::numeric_limits<double>::infinity();
  double b_max = 0.0;
  bool powered = true;
  for (const double ramp : ramps) {
    if (!(ramp > 0.0)) throw Error("schema", "hat_sweep ramps must be positive");
    const Observable hat = Observable::hat(cell[0], cell[1], ramp, q).discretized(model);
    const Observable phi = center(hat, model);
    const NormProfile profile = norm_profile(phi, model, q);
    const std::vector<MomentReport> reports = verify_bound(*bundle.sampler, phi, profile, opts);
    const MomentReport& r = reports.front();
    powered = powered && !r.underpowered;
    k_min = std::min(k_min, r.empirical_K);
    k_max = std::max(k_max, r.empirical_K);
    b_min = std::min(b_min, profile.banach);
    b_max = std::max(b_max, profile.banach);
    Json row;
    row["ramp"] = ramp;
    row["banach"] = profile.banach;
    row["report"] = json_of(r);
    rows.push_back(std::move(row));
  }
  const double k_span = k_min > 0.0 ? k_max / k_min : std::numeric_limits<double>::infinity();
  out.results["rows"] = std::move(rows);
  out.results["k_span"] = k_span;
  out.results["banach_span"] = b_min > 0.0 ? b_max / b_min : 0.0;
  out.checks["k_span_bounded"] = k_span <= k_span_max;
  out.checks["powered"] = powered;
  return out;
}

TaskOutput task_ledger(const Json& cfg) {
  TaskOutput out;
  const SystemBundle bundle = build_system(field(cfg, "system"));
  const FiniteMarkovModel& model = require_model(bundle);
  const Observable phi = model_observable(field(cfg, "observable"), model, true);
  const double q = num_or(cfg, "q", 2.0);
  const int cutoff = int_or(cfg, "cutoff", 20);
  const int horizon = std::max(int_or(cfg, "horizon", 64), cutoff);
  const double slack_floor = num_or(cfg, "slack_floor", -1e-12);

  const NormProfile profile = norm_profile(phi, model, q);
  CertificateRequest req;
  req.horizon = horizon;
  req.probe_closure = std::make_pair(phi.values(), cutoff);
  const ErgodicityCertificate cert = theta_kappa(model, req);
  MomentOracle oracle(model, phi);
  const LedgerReport ledger = inequality_ledger(oracle, profile, cert, cutoff);

  out.results["certificate"] = json_of(cert);
  out.results["profile"] = json_of(profile);
  out.results["ledger"] = json_of(ledger);
  out.checks["slack_nonnegative"] = ledger.min_slack >= slack_floor;
  out.checks["theta_n0"] = ledger.theta_n0_check;
  out.csv = ledger_csv(ledger);
  return out;
}

TaskOutput task_clt(const Json& cfg) {
  TaskOutput out;
  const SystemBundle bundle = build_system(field(cfg, "system"));
  CltOptions opts;
  opts.n = ll_or(cfg, "n", 10000);
  opts.reps = int_or(cfg, "reps", 10000);
  opts.seed = seed_of(cfg);

  CltDiagnostics diag;
  if (bundle.model) {
    const FiniteMarkovModel& model = *bundle.model;
    const Observable phi = model_observable(field(cfg, "observable"), model, true);
    CertificateRequest req;
    req.horizon = int_or(cfg, "horizon", 64);
    req.probes.push_back(phi.values());
    req.probe_names.push_back("phi");
    const ErgodicityCertificate cert = theta_kappa(model, req);
    opts.certificate_p = cert.p();
    diag = clt_check(model, phi, cert.kappa(), cert.theta(), opts);
    out.results["certificate"] = json_of(cert);
  } else {
    if (!cfg.contains("sigma2")) {
      throw Error("bad_argument", "clt on a sampling-only system needs sigma2 (and a centered observable)");
    }
    const Observable phi = build_observable(field(cfg, "observable"));
    diag = clt_check(*bundle.sampler, phi, num_or(cfg, "sigma2", 0.0), opts);
  }

  const Json thresholds = cfg.contains("thresholds") ? cfg.at("thresholds") : Json::object();
  const double tol_mean = num_or(thresholds, "mean", 0.05);
  const double tol_var = num_or(thresholds, "variance", 0.05);
  const double tol_kurt = num_or(thresholds, "kurtosis", 0.15);
  const double tol_ks = num_or(thresholds, "ks", 0.02);
  out.results["diagnostics"] = json_of(diag);
  out.checks["mean_ok"] = std::abs(diag.mean) < tol_mean;
  out.checks["variance_ok"] = std::abs(diag.variance - 1.0) < tol_var;
  out.checks["kurtosis_ok"] = std::abs(diag.kurtosis - 3.0) < tol_kurt;
  out.checks["ks_ok"] = diag.ks_distance < tol_ks;
  return out;
}

TaskOutput task_tightness(const Json& cfg) {
  TaskOutput out;
  const SystemBundle bundle = build_system(field(cfg, "system"));
  std::vector<std::pair<double, double>> grid;
  if (cfg.contains("grid")) {
    const Json& g = cfg.at("grid");
    if (!g.is_array() || g.empty()) throw Error("schema", "grid must be an array of [lo, hi] pairs");
    for (const Json& cell : g) {
      if (!cell.is_array() || cell.size() != 2) throw Error("schema", "grid cells must be [lo, hi]");
      grid.emplace_back(cell[0].get<double>(), cell[1].get<double>());
    }
  } else {
    const double lo = num_or(cfg, "lo", 0.25);
    for (const double delta : num_list(cfg, "deltas")) grid.emplace_back(lo, lo + delta);
  }

  McOptions mc;
  mc.n = ll_or(cfg, "n", 100);
  mc.reps = int_or(cfg, "reps", 20000);
  mc.seed = seed_of(cfg);
  const double factor = num_or(cfg, "factor", 3.0);
  const double margin = num_or(cfg, "margin_se", 3.0);

  TightnessReport report;
  if (cfg.contains("probabilities")) {
    report = empirical_tightness(*bundle.sampler, grid, num_list(cfg, "probabilities"), mc);
  } else {
    report = empirical_tightness(*bundle.sampler, grid, mc);
  }

  bool within = true;
  bool powered = true;
  for (const TightnessRow& row : report.rows) {
    within = within && (row.moment + margin * row.std_error <= factor * row.budget);
    powered = powered && !row.underpowered;
  }
  out.results["report"] = json_of(report);
  out.results["factor"] = factor;
  out.results["margin_se"] = margin;
  out.checks["bound_with_margin"] = within;
  out.checks["powered"] = powered;

  if (cfg.contains("reference_delta")) {
    const double ref = num_or(cfg, "reference_delta", 0.0);
    bool found = false;
    for (const TightnessRow& row : report.rows) {
      if (std::abs((row.hi - row.lo) - ref) > 1e-12) continue;
      found = true;
      const double exact = binomial_mu4(mc.n, row.p);
      out.results["reference"] = Json{{"delta", ref},
                                      {"exact_binomial_mu4", exact},
                                      {"moment", row.moment},
                                      {"std_error", row.std_error}};
      out.checks["binomial_reference"] = std::abs(row.moment - exact) <= margin * row.std_error;
    }
    if (!found) throw Error("schema", "reference_delta matches no grid cell");
  }
  out.csv = tightness_csv(report);
  return out;
}

}  // namespace

std::uint64_t seed_of(const Json& cfg) {
  const Json& s = field(cfg, "seed");
  if (!s.is_number_integer() || (s.is_number_integer() && !s.is_number_unsigned() && s.get<long long>() < 0)) {
    throw Error("schema", "seed must be a non-negative integer");
  }
  return s.get<std::uint64_t>();
}

TaskOutput run_task(const Json& cfg) {
  const std::string task = str_or(cfg, "task", "");
  if (task.empty()) throw Error("schema", "config needs field 'task'");
  if (task == "spectral") return task_spectral(cfg);
  if (task == "oracle_s4") return task_oracle_s4(cfg);
  if (task == "oracle_consistency") return task_oracle_consistency(cfg);
  if (task == "mc_s4") return task_mc_s4(cfg);
  if (task == "bound") return task_bound(cfg);
  if (task == "hat_sweep") return task_hat_sweep(cfg);
  if (task == "ledger") return task_ledger(cfg);
  if (task == "clt") return task_clt(cfg);
  if (task == "tightness") return task_tightness(cfg);
  throw Error("unknown_kind", "unknown task: " + task);
}

}  // namespace fourmoment::cli
