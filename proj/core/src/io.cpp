#include "fourmoment/io.hpp"

#include <fstream>
#include <sstream>

#include "fourmoment/version.hpp"

namespace fourmoment {

namespace {

Json json_vector(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Json json_matrix(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::VectorXd vector_from_json(const Json& j, const std::string& name) {
  if (!j.is_array()) throw Error("schema", name + " must be an array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw Error("schema", name + " must be an array of numbers");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

/// Doubles rendered exactly as nlohmann renders them inside documents, so CSV
/// cells round-trip to the same bits as the JSON report.
std::string csv_number(double x) { return Json(x).dump(); }

const char* csv_bool(bool b) { return b ? "true" : "false"; }

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (const char ch : bytes) {
    h ^= static_cast<unsigned char>(ch);
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = digits[value & 0xF];
    value >>= 4;
  }
  return s;
}

std::string canonical_dump(const Json& j) { return j.dump(2) + "\n"; }

Json json_of(const FiniteMarkovModel& model) {
  Json j;
  j["kind"] = "finite_markov";
  j["states"] = model.states();
  j["coords"] = json_vector(model.coords());
  j["transition"] = json_matrix(model.transition());
  j["stationary"] = model.has_stationary() ? json_vector(model.stationary()) : Json(nullptr);
  return j;
}

FiniteMarkovModel model_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("transition")) {
    throw Error("schema", "model JSON needs a transition matrix");
  }
  const Json& t = j["transition"];
  if (!t.is_array() || t.empty()) throw Error("schema", "transition must be a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(t.size());
  Eigen::MatrixXd p(rows, rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Json& row = t[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != rows) {
      throw Error("schema", "transition must be square");
    }
    for (Eigen::Index k = 0; k < rows; ++k) {
      const Json& cell = row[static_cast<std::size_t>(k)];
      if (!cell.is_number()) throw Error("schema", "transition entries must be numbers");
      p(i, k) = cell.get<double>();
    }
  }
  std::vector<std::string> states;
  if (j.contains("states")) {
    if (!j["states"].is_array()) throw Error("schema", "states must be an array of strings");
    for (const auto& s : j["states"]) {
      if (!s.is_string()) throw Error("schema", "states must be an array of strings");
      states.push_back(s.get<std::string>());
    }
  }
  std::optional<Eigen::VectorXd> nu;
  if (j.contains("stationary") && !j["stationary"].is_null()) {
    nu = vector_from_json(j["stationary"], "stationary");
  }
  std::optional<Eigen::VectorXd> coords;
  if (j.contains("coords") && !j["coords"].is_null()) {
    coords = vector_from_json(j["coords"], "coords");
  }
  return FiniteMarkovModel(std::move(states), std::move(p), std::move(nu), std::move(coords));
}

Json json_of(const Observable& phi) {
  Json j;
  j["norm_kind"] = to_string(phi.norm_kind());
  j["q"] = phi.q();
  j["banach_norm"] = phi.banach_norm();
  j["sup_bound"] = phi.sup_bound() ? Json(*phi.sup_bound()) : Json(nullptr);
  j["values"] = phi.has_values() ? json_vector(phi.values()) : Json(nullptr);
  j["has_rule"] = phi.has_rule();
  return j;
}

Json json_of(const NormProfile& profile) {
  Json j;
  j["phi4_l1"] = profile.phi4_l1;
  j["phi3_lq"] = profile.phi3_lq;
  j["phi2_lq"] = profile.phi2_lq;
  j["phi2_l1"] = profile.phi2_l1;
  j["phi_lq"] = profile.phi_lq;
  j["banach"] = profile.banach;
  j["m"] = profile.m;
  j["q"] = profile.q;
  return j;
}

Json json_of(const ErgodicityCertificate& cert) {
  Json j;
  j["kappa"] = cert.kappa();
  j["theta"] = cert.theta();
  j["p"] = cert.p();
  j["C"] = cert.embedding_c();
  j["M"] = cert.algebra_m();
  j["horizon"] = cert.horizon();
  j["probes"] = cert.probe_names();
  return j;
}

Json json_of(const SpectralGapEstimate& est) {
  Json j;
  j["theta"] = est.theta;
  j["iterations"] = est.iterations;
  j["residual"] = est.residual;
  j["complex_pair"] = est.complex_pair;
  return j;
}

Json json_of(const GreenKubo& gk) {
  Json j;
  j["sigma2"] = gk.sigma2;
  j["truncation"] = gk.truncation;
  j["tail_bound"] = gk.tail_bound;
  return j;
}

Json json_of(const McEstimate& est) {
  Json j;
  j["mean"] = est.mean;
  j["std_error"] = est.std_error;
  j["reps"] = est.reps;
  j["seed"] = est.seed;
  j["underpowered"] = est.underpowered;
  return j;
}

Json json_of(const MomentReport& report) {
  Json j;
  j["n"] = report.n;
  j["lhs"] = report.lhs;
  j["lhs_std_error"] = report.lhs_std_error;
  j["mc_mode"] = report.mc_mode;
  j["underpowered"] = report.underpowered;
  j["term1"] = report.term1;
  j["term2"] = report.term2;
  j["term3"] = report.term3;
  j["empirical_K"] = report.empirical_K;
  return j;
}

Json json_of(const LedgerEntry& entry) {
  Json j;
  j["case"] = to_string(entry.case_tag);
  j["i"] = entry.i;
  j["j"] = entry.j;
  j["k"] = entry.k;
  j["lhs"] = entry.lhs;
  j["bound"] = entry.bound;
  j["slack"] = entry.slack;
  j["inequality"] = entry.inequality;
  return j;
}

Json json_of(const LedgerReport& report) {
  Json j;
  Json entries = Json::array();
  for (const auto& e : report.entries) entries.push_back(json_of(e));
  j["entries"] = std::move(entries);
  j["cutoff"] = report.cutoff;
  j["n0"] = report.n0;
  j["theta_n0_check"] = report.theta_n0_check;
  j["min_slack"] = report.min_slack;
  j["aggregate_from"] = report.aggregate_from;
  j["aggregate_case2"] = report.aggregate_case2;
  j["aggregate_note"] = report.aggregate_note;
  j["decomposition_bound_at_cutoff"] = report.decomposition_bound_at_cutoff;
  j["exact_s4_at_cutoff"] = report.exact_s4_at_cutoff;
  return j;
}

Json json_of(const CltDiagnostics& diag) {
  Json j;
  j["n"] = diag.n;
  j["reps"] = diag.reps;
  j["sigma2"] = diag.sigma2;
  j["mean"] = diag.mean;
  j["variance"] = diag.variance;
  j["skewness"] = diag.skewness;
  j["kurtosis"] = diag.kurtosis;
  j["ks_distance"] = diag.ks_distance;
  return j;
}

Json json_of(const TightnessRow& row) {
  Json j;
  j["lo"] = row.lo;
  j["hi"] = row.hi;
  j["p"] = row.p;
  j["moment"] = row.moment;
  j["std_error"] = row.std_error;
  j["budget"] = row.budget;
  j["ratio"] = row.ratio;
  j["underpowered"] = row.underpowered;
  return j;
}

Json json_of(const TightnessReport& report) {
  Json j;
  Json rows = Json::array();
  for (const auto& r : report.rows) rows.push_back(json_of(r));
  j["rows"] = std::move(rows);
  j["fitted_C"] = report.fitted_C;
  return j;
}

std::string bound_sweep_csv(const std::vector<MomentReport>& reports) {
  std::ostringstream out;
  out << "n,lhs,lhs_std_error,mc_mode,underpowered,term1,term2,term3,empirical_K\n";
  for (const auto& r : reports) {
    out << r.n << ',' << csv_number(r.lhs) << ',' << csv_number(r.lhs_std_error) << ','
        << csv_bool(r.mc_mode) << ',' << csv_bool(r.underpowered) << ','
        << csv_number(r.term1) << ',' << csv_number(r.term2) << ',' << csv_number(r.term3)
        << ',' << csv_number(r.empirical_K) << '\n';
  }
  return out.str();
}

std::string ledger_csv(const LedgerReport& report) {
  std::ostringstream out;
  out << "case,inequality,i,j,k,lhs,bound,slack\n";
  for (const auto& e : report.entries) {
    out << to_string(e.case_tag) << ',' << e.inequality << ',' << e.i << ',' << e.j << ','
        << e.k << ',' << csv_number(e.lhs) << ',' << csv_number(e.bound) << ','
        << csv_number(e.slack) << '\n';
  }
  return out.str();
}

std::string tightness_csv(const TightnessReport& report) {
  std::ostringstream out;
  out << "lo,hi,p,moment,std_error,budget,ratio,underpowered\n";
  for (const auto& r : report.rows) {
    out << csv_number(r.lo) << ',' << csv_number(r.hi) << ',' << csv_number(r.p) << ','
        << csv_number(r.moment) << ',' << csv_number(r.std_error) << ','
        << csv_number(r.budget) << ',' << csv_number(r.ratio) << ','
        << csv_bool(r.underpowered) << '\n';
  }
  return out.str();
}

Json envelope_json(const ReportEnvelope& envelope) {
  bool pass = envelope.pass;
  if (envelope.checks.is_object()) {
    for (const auto& item : envelope.checks.items()) {
      if (item.value().is_boolean() && !item.value().get<bool>()) pass = false;
    }
  }
  Json j;
  j["checks"] = envelope.checks;
  j["config"] = envelope.config;
  j["config_hash"] = hex64(fnv1a64(canonical_dump(envelope.config)));
  j["pass"] = pass;
  j["results"] = envelope.results;
  j["seed"] = envelope.seed;
  j["version"] = kVersion;
  return j;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io", "cannot read file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error("io", "cannot read file: " + path);
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("io", "cannot write file: " + path);
  out << content;
  out.flush();
  if (!out) throw Error("io", "cannot write file: " + path);
}

Json load_json_file(const std::string& path) {
  const std::string text = read_text_file(path);
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error("schema", "invalid JSON in " + path + ": " + e.what());
  }
}

}  // namespace fourmoment
