#include <chrono>
#include <cstdint>
#include <ctime>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "builders.hpp"
#include "fourmoment/spectral.hpp"
#include "fourmoment/version.hpp"
#include "tasks.hpp"

namespace fm = fourmoment;
using fm::Json;
using fm::cli::TaskOutput;

namespace {

std::vector<long long> parse_ll_list(const std::string& s, const char* flag) {
  std::vector<long long> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const std::size_t comma = std::min(s.find(',', pos), s.size());
    try {
      out.push_back(std::stoll(s.substr(pos, comma - pos)));
    } catch (const std::exception&) {
      throw fm::Error("bad_argument", std::string(flag) + " expects comma-separated integers");
    }
    pos = comma + 1;
  }
  if (out.empty()) throw fm::Error("bad_argument", std::string(flag) + " expects comma-separated integers");
  return out;
}

std::vector<double> parse_num_list(const std::string& s, const char* flag) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const std::size_t comma = std::min(s.find(',', pos), s.size());
    try {
      out.push_back(std::stod(s.substr(pos, comma - pos)));
    } catch (const std::exception&) {
      throw fm::Error("bad_argument", std::string(flag) + " expects comma-separated numbers");
    }
    pos = comma + 1;
  }
  if (out.empty()) throw fm::Error("bad_argument", std::string(flag) + " expects comma-separated numbers");
  return out;
}

Json parse_grid(const std::string& s) {
  Json grid = Json::array();
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const std::size_t comma = std::min(s.find(',', pos), s.size());
    const std::string cell = s.substr(pos, comma - pos);
    const std::size_t colon = cell.find(':');
    if (colon == std::string::npos) {
      throw fm::Error("bad_argument", "--grid expects lo:hi pairs separated by commas");
    }
    try {
      grid.push_back(Json::array({std::stod(cell.substr(0, colon)), std::stod(cell.substr(colon + 1))}));
    } catch (const std::exception&) {
      throw fm::Error("bad_argument", "--grid expects lo:hi pairs separated by commas");
    }
    pos = comma + 1;
  }
  return grid;
}

std::string timestamp_utc() {
  const std::time_t tt = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Reports themselves carry no clock state (same config + seed => same bytes);
/// the timestamp lives in a sidecar next to the report.
void write_with_sidecar(const std::string& out, const std::string& payload) {
  fm::write_text_file(out, payload);
  Json meta;
  meta["report"] = out;
  meta["tool"] = "fourmoment";
  meta["version"] = fm::kVersion;
  meta["written_at"] = timestamp_utc();
  fm::write_text_file(out + ".meta.json", fm::canonical_dump(meta));
}

int emit_report(const Json& cfg, TaskOutput&& t, const std::string& out, const std::string& format) {
  fm::ReportEnvelope env;
  env.config = cfg;
  env.seed = fm::cli::seed_of(cfg);
  env.results = std::move(t.results);
  env.checks = t.checks.is_object() ? t.checks : Json::object();
  const Json doc = fm::envelope_json(env);
  std::string payload;
  if (format == "csv") {
    if (t.csv.empty()) throw fm::Error("bad_argument", "no CSV form for this command");
    payload = t.csv;
  } else if (format == "json") {
    payload = fm::canonical_dump(doc);
  } else {
    throw fm::Error("bad_argument", "unknown format: " + format);
  }
  if (out.empty()) {
    std::cout << payload;
  } else {
    write_with_sidecar(out, payload);
  }
  return doc.at("pass").get<bool>() ? 0 : 2;
}

int run_config_task(const Json& cfg, const std::string& out, const std::string& format) {
  TaskOutput t = fm::cli::run_task(cfg);
  return emit_report(cfg, std::move(t), out, format);
}

struct SpectralOpts {
  std::string model, norm = "sup", out;
  int horizon = 64;
};

struct OracleS4Opts {
  std::string model, obs, ns, out, format = "json";
  long long n = 0;
  bool center = false;
};

struct McS4Opts {
  std::string system, obs, out;
  long long n = 0;
  int reps = 100;
  std::uint64_t seed = 0;
  bool center = false;
};

struct BoundOpts {
  std::string model, obs, ns, mode = "exact", out, format = "json";
  int reps = 2000;
  std::uint64_t seed = 0;
  double q = 2.0;
};

struct LedgerOpts {
  std::string model, obs, out, format = "json";
  int cutoff = 20;
  int horizon = 64;
  double q = 2.0;
};

struct CltOpts {
  std::string system, obs, out;
  long long n = 10000;
  int reps = 10000;
  std::uint64_t seed = 0;
  int horizon = 64;
  double sigma2 = 0.0;
  double tol_mean = 0.05, tol_var = 0.05, tol_kurt = 0.15, tol_ks = 0.02;
};

struct TightnessOpts {
  std::string system, deltas, grid, probs, out, format = "json";
  double lo = 0.25;
  long long n = 100;
  int reps = 20000;
  std::uint64_t seed = 0;
  double factor = 3.0, margin = 3.0, reference_delta = 0.0;
};

struct RunOpts {
  std::string config, out;
  std::uint64_t seed = 0;
};

void add_ledger_command(CLI::App& parent, int& exit_code) {
  auto o = std::make_shared<LedgerOpts>();
  CLI::App* cmd = parent.add_subcommand("ledger", "certify the per-triple proof inequalities");
  cmd->add_option("--model", o->model, "finite system JSON file")->required();
  cmd->add_option("--obs", o->obs, "observable JSON file")->required();
  cmd->add_option("--cutoff", o->cutoff, "maximum gap coordinate (default 20)");
  cmd->add_option("--horizon", o->horizon, "certificate horizon (raised to cutoff if below)");
  cmd->add_option("--q", o->q, "integrability exponent (default 2)");
  cmd->add_option("--out", o->out, "output path (default stdout)");
  cmd->add_option("--format", o->format, "json or csv");
  cmd->callback([o, &exit_code] {
    Json cfg;
    cfg["task"] = "ledger";
    cfg["seed"] = 0;
    cfg["system"] = fm::load_json_file(o->model);
    cfg["observable"] = fm::load_json_file(o->obs);
    cfg["cutoff"] = o->cutoff;
    cfg["horizon"] = o->horizon;
    cfg["q"] = o->q;
    exit_code = run_config_task(cfg, o->out, o->format);
  });
}

void add_clt_command(CLI::App& parent, int& exit_code) {
  auto o = std::make_shared<CltOpts>();
  CLI::App* cmd = parent.add_subcommand("clt", "normal-limit diagnostics for S_n / (sigma sqrt(n))");
  cmd->add_option("--system", o->system, "system JSON file")->required();
  cmd->add_option("--obs", o->obs, "observable JSON file")->required();
  cmd->add_option("--n", o->n, "trajectory length (default 10000)");
  cmd->add_option("--reps", o->reps, "replicates (default 10000)");
  CLI::Option* seed = cmd->add_option("--seed", o->seed, "RNG seed")->required();
  cmd->add_option("--horizon", o->horizon, "certificate horizon for finite systems");
  CLI::Option* sig = cmd->add_option("--sigma2", o->sigma2, "asymptotic variance (sampling-only systems)");
  cmd->add_option("--tol-mean", o->tol_mean, "acceptance |mean| threshold");
  cmd->add_option("--tol-var", o->tol_var, "acceptance |variance-1| threshold");
  cmd->add_option("--tol-kurt", o->tol_kurt, "acceptance |kurtosis-3| threshold");
  cmd->add_option("--tol-ks", o->tol_ks, "acceptance KS-distance threshold");
  cmd->add_option("--out", o->out, "output path (default stdout)");
  cmd->callback([o, sig, seed, &exit_code] {
    (void)seed;
    Json cfg;
    cfg["task"] = "clt";
    cfg["seed"] = o->seed;
    cfg["system"] = fm::load_json_file(o->system);
    cfg["observable"] = fm::load_json_file(o->obs);
    cfg["n"] = o->n;
    cfg["reps"] = o->reps;
    cfg["horizon"] = o->horizon;
    if (sig->count() > 0) cfg["sigma2"] = o->sigma2;
    cfg["thresholds"] = Json{{"mean", o->tol_mean},
                             {"variance", o->tol_var},
                             {"kurtosis", o->tol_kurt},
                             {"ks", o->tol_ks}};
    exit_code = run_config_task(cfg, o->out, "json");
  });
}

void add_tightness_command(CLI::App& parent, int& exit_code) {
  auto o = std::make_shared<TightnessOpts>();
  CLI::App* cmd = parent.add_subcommand("tightness", "empirical-process fourth-moment tightness table");
  cmd->add_option("--system", o->system, "system JSON file")->required();
  cmd->add_option("--lo", o->lo, "left endpoint for delta cells (default 0.25)");
  cmd->add_option("--deltas", o->deltas, "comma-separated cell widths");
  cmd->add_option("--grid", o->grid, "explicit lo:hi cells, comma-separated");
  cmd->add_option("--probs", o->probs, "explicit cell probabilities (comma-separated)");
  cmd->add_option("--n", o->n, "trajectory length (default 100)");
  cmd->add_option("--reps", o->reps, "replicates (default 20000)");
  cmd->add_option("--seed", o->seed, "RNG seed")->required();
  cmd->add_option("--factor", o->factor, "budget multiplier C (default 3)");
  cmd->add_option("--margin-se", o->margin, "SE margin for the acceptance check (default 3)");
  CLI::Option* ref = cmd->add_option("--reference-delta", o->reference_delta,
                                     "check the exact binomial fourth moment at this width");
  cmd->add_option("--out", o->out, "output path (default stdout)");
  cmd->add_option("--format", o->format, "json or csv");
  cmd->callback([o, ref, &exit_code] {
    Json cfg;
    cfg["task"] = "tightness";
    cfg["seed"] = o->seed;
    cfg["system"] = fm::load_json_file(o->system);
    if (!o->grid.empty()) {
      cfg["grid"] = parse_grid(o->grid);
    } else if (!o->deltas.empty()) {
      cfg["lo"] = o->lo;
      cfg["deltas"] = parse_num_list(o->deltas, "--deltas");
    } else {
      throw fm::Error("bad_argument", "tightness needs --deltas or --grid");
    }
    if (!o->probs.empty()) cfg["probabilities"] = parse_num_list(o->probs, "--probs");
    cfg["n"] = o->n;
    cfg["reps"] = o->reps;
    cfg["factor"] = o->factor;
    cfg["margin_se"] = o->margin;
    if (ref->count() > 0) cfg["reference_delta"] = o->reference_delta;
    exit_code = run_config_task(cfg, o->out, o->format);
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fourth-moment bounds, proof ledgers and CLT diagnostics for ergodic Markov systems"};
  app.require_subcommand(1);
  int exit_code = 0;

  // ---- spectral ------------------------------------------------------------
  auto sp = std::make_shared<SpectralOpts>();
  {
    CLI::App* cmd = app.add_subcommand("spectral", "stationary law, spectral gap, ergodicity certificate");
    cmd->add_option("--model", sp->model, "finite system JSON file")->required();
    cmd->add_option("--norm", sp->norm, "certificate norm (sup)");
    cmd->add_option("--horizon", sp->horizon, "decay horizon (default 64)");
    cmd->add_option("--out", sp->out, "certificate path (default stdout)");
    cmd->callback([sp, &exit_code] {
      const fm::cli::SystemBundle bundle = fm::cli::build_system(fm::load_json_file(sp->model));
      const fm::FiniteMarkovModel& model = fm::cli::require_model(bundle);
      fm::CertificateRequest req;
      req.norm = fm::norm_kind_from_string(sp->norm);
      req.horizon = sp->horizon;
      const fm::ErgodicityCertificate cert = fm::theta_kappa(model, req);
      const std::string payload = fm::canonical_dump(fm::json_of(cert));
      if (sp->out.empty()) {
        std::cout << payload;
      } else {
        write_with_sidecar(sp->out, payload);
      }
      exit_code = 0;
    });
  }

  // ---- oracle s4 -----------------------------------------------------------
  auto os = std::make_shared<OracleS4Opts>();
  {
    CLI::App* oracle_cmd = app.add_subcommand("oracle", "exact stationary moment computations");
    oracle_cmd->require_subcommand(1);
    CLI::App* cmd = oracle_cmd->add_subcommand("s4", "exact E[S_n^4] rows");
    cmd->add_option("--model", os->model, "finite system JSON file")->required();
    cmd->add_option("--obs", os->obs, "observable JSON file")->required();
    cmd->add_option("--n", os->n, "single n");
    cmd->add_option("--ns", os->ns, "comma-separated n list");
    cmd->add_flag("--center", os->center, "center the observable first");
    cmd->add_option("--out", os->out, "output path (default stdout)");
    cmd->add_option("--format", os->format, "json or csv");
    cmd->callback([os, &exit_code] {
      Json cfg;
      cfg["task"] = "oracle_s4";
      cfg["seed"] = 0;
      cfg["system"] = fm::load_json_file(os->model);
      cfg["observable"] = fm::load_json_file(os->obs);
      if (!os->ns.empty()) {
        cfg["ns"] = parse_ll_list(os->ns, "--ns");
      } else if (os->n >= 1) {
        cfg["ns"] = Json::array({os->n});
      } else {
        throw fm::Error("bad_argument", "oracle s4 needs --n or --ns");
      }
      cfg["center"] = os->center;
      exit_code = run_config_task(cfg, os->out, os->format);
    });
  }

  // ---- mc s4 ---------------------------------------------------------------
  auto ms = std::make_shared<McS4Opts>();
  {
    CLI::App* mc_cmd = app.add_subcommand("mc", "Monte Carlo moment estimates");
    mc_cmd->require_subcommand(1);
    CLI::App* cmd = mc_cmd->add_subcommand("s4", "MC estimate of E[S_n^4]");
    cmd->add_option("--system", ms->system, "system JSON file")->required();
    cmd->add_option("--obs", ms->obs, "observable JSON file")->required();
    cmd->add_option("--n", ms->n, "trajectory length")->required();
    cmd->add_option("--reps", ms->reps, "replicates (default 100)");
    cmd->add_option("--seed", ms->seed, "RNG seed")->required();
    cmd->add_flag("--center", ms->center, "center against the finite model first");
    cmd->add_option("--out", ms->out, "output path (default stdout)");
    cmd->callback([ms, &exit_code] {
      Json cfg;
      cfg["task"] = "mc_s4";
      cfg["seed"] = ms->seed;
      cfg["system"] = fm::load_json_file(ms->system);
      cfg["observable"] = fm::load_json_file(ms->obs);
      cfg["n"] = ms->n;
      cfg["reps"] = ms->reps;
      cfg["center"] = ms->center;
      exit_code = run_config_task(cfg, ms->out, "json");
    });
  }

  // ---- verify --------------------------------------------------------------
  {
    CLI::App* verify_cmd = app.add_subcommand("verify", "bound / ledger / clt / tightness checks");
    verify_cmd->require_subcommand(1);

    auto bo = std::make_shared<BoundOpts>();
    CLI::App* bound_cmd = verify_cmd->add_subcommand("bound", "fourth-moment bound sweep");
    bound_cmd->add_option("--model", bo->model, "finite system JSON file")->required();
    bound_cmd->add_option("--obs", bo->obs, "observable JSON file")->required();
    bound_cmd->add_option("--ns", bo->ns, "comma-separated n list")->required();
    bound_cmd->add_option("--mode", bo->mode, "exact or mc (default exact)");
    bound_cmd->add_option("--reps", bo->reps, "MC replicates (mc mode)");
    CLI::Option* bseed = bound_cmd->add_option("--seed", bo->seed, "RNG seed (mc mode)");
    bound_cmd->add_option("--q", bo->q, "integrability exponent (default 2)");
    bound_cmd->add_option("--out", bo->out, "output path (default stdout)");
    bound_cmd->add_option("--format", bo->format, "json or csv");
    bound_cmd->callback([bo, bseed, &exit_code] {
      Json cfg;
      cfg["task"] = "bound";
      if (bo->mode == "mc" && bseed->count() == 0) {
        throw fm::Error("bad_argument", "--seed is required in mc mode");
      }
      cfg["seed"] = bo->mode == "mc" ? bo->seed : std::uint64_t{0};
      Json entry;
      entry["label"] = "cli";
      entry["system"] = fm::load_json_file(bo->model);
      entry["observable"] = fm::load_json_file(bo->obs);
      cfg["cases"] = Json::array({entry});
      cfg["ns"] = parse_ll_list(bo->ns, "--ns");
      cfg["mode"] = bo->mode;
      cfg["q"] = bo->q;
      if (bo->mode == "mc") cfg["reps"] = bo->reps;
      exit_code = run_config_task(cfg, bo->out, bo->format);
    });

    add_ledger_command(*verify_cmd, exit_code);
    add_clt_command(*verify_cmd, exit_code);
    add_tightness_command(*verify_cmd, exit_code);
  }

  // Top-level shortcuts for the three check subcommands.
  add_ledger_command(app, exit_code);
  add_clt_command(app, exit_code);
  add_tightness_command(app, exit_code);

  // ---- run -----------------------------------------------------------------
  auto ro = std::make_shared<RunOpts>();
  {
    CLI::App* cmd = app.add_subcommand("run", "execute a preset config and write report.json");
    cmd->add_option("config", ro->config, "config JSON path")->required();
    CLI::Option* seed = cmd->add_option("--seed", ro->seed, "override the config seed");
    cmd->add_option("--out", ro->out, "report path (default report.json)");
    cmd->callback([ro, seed, &exit_code] {
      Json cfg = fm::load_json_file(ro->config);
      if (!cfg.is_object()) throw fm::Error("schema", "config must be a JSON object");
      if (seed->count() > 0) cfg["seed"] = ro->seed;
      if (!cfg.contains("seed")) throw fm::Error("schema", "config needs a seed");
      exit_code = run_config_task(cfg, ro->out.empty() ? "report.json" : ro->out, "json");
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const fm::Error& e) {
    std::cerr << "error[" << e.code() << "]: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return exit_code;
}
