#include "builders.hpp"

#include "fourmoment/spectral.hpp"

namespace fourmoment::cli {

namespace {

const Json& require_field(const Json& j, const char* name, const char* ctx) {
  if (!j.is_object() || !j.contains(name)) {
    throw Error("schema", std::string(ctx) + " needs field '" + name + "'");
  }
  return j.at(name);
}

double num_field(const Json& j, const char* name, const char* ctx) {
  const Json& f = require_field(j, name, ctx);
  if (!f.is_number()) throw Error("schema", std::string(ctx) + " field '" + name + "' must be a number");
  return f.get<double>();
}

double num_or(const Json& j, const char* name, double fallback) {
  if (!j.is_object() || !j.contains(name)) return fallback;
  if (!j.at(name).is_number()) throw Error("schema", std::string("field '") + name + "' must be a number");
  return j.at(name).get<double>();
}

int int_or(const Json& j, const char* name, int fallback) {
  if (!j.is_object() || !j.contains(name)) return fallback;
  if (!j.at(name).is_number_integer()) throw Error("schema", std::string("field '") + name + "' must be an integer");
  return j.at(name).get<int>();
}

std::string str_or(const Json& j, const char* name, const std::string& fallback) {
  if (!j.is_object() || !j.contains(name)) return fallback;
  if (!j.at(name).is_string()) throw Error("schema", std::string("field '") + name + "' must be a string");
  return j.at(name).get<std::string>();
}

Eigen::MatrixXd matrix_field(const Json& j, const char* name, const char* ctx) {
  const Json& rows = require_field(j, name, ctx);
  if (!rows.is_array() || rows.empty()) throw Error("schema", std::string(ctx) + " field '" + name + "' must be an array of rows");
  const auto r = static_cast<Eigen::Index>(rows.size());
  const auto c = static_cast<Eigen::Index>(rows[0].is_array() ? rows[0].size() : 0);
  if (c == 0) throw Error("schema", std::string(ctx) + " field '" + name + "' must be an array of rows");
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    const Json& row = rows[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != c) {
      throw Error("schema", std::string(ctx) + " field '" + name + "' must be rectangular");
    }
    for (Eigen::Index k = 0; k < c; ++k) {
      if (!row[static_cast<std::size_t>(k)].is_number()) {
        throw Error("schema", std::string(ctx) + " field '" + name + "' entries must be numbers");
      }
      m(i, k) = row[static_cast<std::size_t>(k)].get<double>();
    }
  }
  return m;
}

Eigen::VectorXd vector_field(const Json& j, const char* name, const char* ctx) {
  const Json& arr = require_field(j, name, ctx);
  if (!arr.is_array()) throw Error("schema", std::string(ctx) + " field '" + name + "' must be an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number()) throw Error("schema", std::string(ctx) + " field '" + name + "' entries must be numbers");
    v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
  }
  return v;
}

SystemBundle finite_bundle(std::string kind, FiniteMarkovModel model) {
  SystemBundle b;
  b.kind = std::move(kind);
  b.sampler = model_sampler(model);
  b.model = std::move(model);
  return b;
}

SystemBundle sampler_bundle(std::string kind, std::unique_ptr<StationarySampler> sampler) {
  SystemBundle b;
  b.kind = std::move(kind);
  b.sampler = std::move(sampler);
  return b;
}

}  // namespace

IntervalMap build_map(const Json& j) {
  const std::string kind = str_or(j, "kind", "");
  if (kind == "doubling") return IntervalMap::doubling();
  if (kind == "beta") return IntervalMap::beta(num_field(j, "beta", "beta map"));
  if (kind == "gauss") return IntervalMap::gauss();
  throw Error("unknown_kind", "unknown map kind: " + kind);
}

SystemBundle build_system(const Json& j) {
  if (!j.is_object()) throw Error("schema", "system must be a JSON object");
  std::string kind = str_or(j, "kind", "");
  if (kind.empty() && j.contains("transition")) kind = "finite_markov";
  if (kind == "finite_markov") {
    FiniteMarkovModel m = model_from_json(j);
    if (!m.has_stationary()) {
      // doeblin_chain re-validates irreducibility/aperiodicity and solves nu.
      FiniteMarkovModel checked = doeblin_chain(m.transition(), m.coords());
      m.attach_stationary(checked.stationary());
    }
    return finite_bundle(kind, std::move(m));
  }
  if (kind == "two_point_flip") {
    return finite_bundle(kind, two_point_flip(num_field(j, "p", "two_point_flip")));
  }
  if (kind == "reflected_walk") {
    return finite_bundle(kind, reflected_walk(int_or(j, "states", 3),
                                              num_field(j, "p", "reflected_walk"),
                                              num_field(j, "q", "reflected_walk")));
  }
  if (kind == "ulam") {
    UlamOptions opt;
    opt.cells = int_or(j, "cells", opt.cells);
    opt.samples_per_cell = int_or(j, "samples_per_cell", opt.samples_per_cell);
    return finite_bundle(kind, ulam(build_map(require_field(j, "map", "ulam system")), opt));
  }
  if (kind == "doubling" || kind == "beta" || kind == "gauss") {
    Json mj = j;
    mj["kind"] = kind;
    return sampler_bundle(kind, expanding_map(build_map(mj), int_or(j, "burn_in", -1)));
  }
  if (kind == "subshift") {
    const Eigen::MatrixXd allowed = matrix_field(j, "allowed", "subshift");
    FiniteMarkovModel chain =
        doeblin_chain(matrix_field(require_field(j, "symbol_chain", "subshift"), "transition",
                                   "subshift symbol_chain"));
    return sampler_bundle(kind, subshift(allowed, std::move(chain), int_or(j, "depth", 48)));
  }
  if (kind == "linear_process") {
    LinearProcessSpec spec;
    spec.rho = num_field(j, "rho", "linear_process");
    spec.scale = num_or(j, "scale", 1.0);
    spec.truncation_tol = num_or(j, "truncation_tol", spec.truncation_tol);
    const std::string innovation = str_or(j, "innovation", "rademacher");
    if (innovation == "rademacher") {
      spec.innovation = LinearProcessSpec::Innovation::Rademacher;
    } else if (innovation == "uniform") {
      spec.innovation = LinearProcessSpec::Innovation::Uniform;
    } else {
      throw Error("unknown_kind", "unknown innovation kind: " + innovation);
    }
    return sampler_bundle(kind, linear_process(spec));
  }
  if (kind == "ar") {
    NoiseSpec noise;
    const Json& nj = require_field(j, "noise", "ar system");
    const std::string nk = str_or(nj, "kind", "uniform");
    if (nk == "uniform") {
      noise.kind = NoiseSpec::Kind::Uniform;
    } else if (nk == "rademacher") {
      noise.kind = NoiseSpec::Kind::Rademacher;
    } else {
      throw Error("unknown_kind", "unknown noise kind: " + nk);
    }
    noise.half_width = num_or(nj, "half_width", 1.0);
    return sampler_bundle(kind, ar_model(num_field(j, "rate", "ar system"), noise,
                                         int_or(j, "burn_in", -1)));
  }
  if (kind == "random_lipschitz") {
    const Json& maps = require_field(j, "maps", "random_lipschitz");
    if (!maps.is_array() || maps.empty()) throw Error("schema", "random_lipschitz needs maps");
    std::vector<AffineMap> affine;
    for (const Json& mj : maps) {
      affine.push_back({num_field(mj, "slope", "affine map"), num_field(mj, "intercept", "affine map")});
    }
    std::vector<double> weights;
    if (j.contains("weights")) {
      const Eigen::VectorXd w = vector_field(j, "weights", "random_lipschitz");
      weights.assign(w.data(), w.data() + w.size());
    }
    return sampler_bundle(kind, random_lipschitz(std::move(affine), std::move(weights),
                                                 int_or(j, "burn_in", -1)));
  }
  if (kind == "iid_uniform") {
    return sampler_bundle(kind, iid_uniform_sampler());
  }
  throw Error("unknown_kind", "unknown system kind: " + kind);
}

Observable build_observable(const Json& j) {
  if (!j.is_object()) throw Error("schema", "observable must be a JSON object");
  const std::string kind = str_or(j, "kind", "");
  const double q = num_or(j, "q", 2.0);
  if (kind == "values") {
    std::optional<double> banach;
    if (j.contains("banach")) banach = num_field(j, "banach", "values observable");
    return Observable::from_values(vector_field(j, "values", "values observable"), q,
                                   norm_kind_from_string(str_or(j, "norm_kind", "sup")), banach);
  }
  if (kind == "coordinate") return Observable::coordinate(q);
  if (kind == "hat") {
    return Observable::hat(num_field(j, "lo", "hat observable"), num_field(j, "hi", "hat observable"),
                           num_field(j, "ramp", "hat observable"), q);
  }
  if (kind == "indicator") {
    return Observable::indicator(num_field(j, "lo", "indicator observable"),
                                 num_field(j, "hi", "indicator observable"), q);
  }
  throw Error("unknown_kind", "unknown observable kind: " + kind);
}

const FiniteMarkovModel& require_model(const SystemBundle& bundle) {
  if (!bundle.model) {
    throw Error("bad_argument", "this operation needs a finite model; system kind '" +
                                    bundle.kind + "' only samples");
  }
  return *bundle.model;
}

}  // namespace fourmoment::cli
