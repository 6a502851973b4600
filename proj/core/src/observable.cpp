#include "fourmoment/observable.hpp"

#include <cmath>

#include "fourmoment/numeric.hpp"

namespace fourmoment {

std::string to_string(NormKind kind) {
  switch (kind) {
    case NormKind::Sup: return "sup";
    case NormKind::Lipschitz: return "lipschitz";
    case NormKind::BV: return "bv";
  }
  return "sup";
}

NormKind norm_kind_from_string(const std::string& s) {
  if (s == "sup") return NormKind::Sup;
  if (s == "lipschitz") return NormKind::Lipschitz;
  if (s == "bv") return NormKind::BV;
  throw Error("bad_argument", "unknown norm kind: " + s);
}

namespace {

double max_abs(const Eigen::VectorXd& v) {
  double m = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) m = std::max(m, std::abs(v[i]));
  return m;
}

/// |x|^e with an exact repeated-product path for integer exponents.
double abs_pow(double x, double e) {
  const double ax = std::abs(x);
  const double r = std::round(e);
  if (r == e && r >= 0.0 && r <= 64.0) return pow_int(ax, static_cast<int>(r));
  return std::pow(ax, e);
}

}  // namespace

Observable Observable::from_values(Eigen::VectorXd values, double q, NormKind kind,
                                   std::optional<double> banach_norm,
                                   std::optional<double> sup_bound) {
  if (values.size() == 0) throw Error("bad_argument", "empty values");
  Observable phi;
  const double sup = max_abs(values);
  phi.values_ = std::move(values);
  phi.q_ = q;
  phi.kind_ = kind;
  if (banach_norm.has_value()) {
    if (*banach_norm < sup - 1e-12) {
      throw Error("bad_argument", "declared Banach norm below the sup of the values");
    }
    phi.banach_ = *banach_norm;
  } else {
    phi.banach_ = sup;
  }
  phi.sup_bound_ = sup_bound.has_value() ? *sup_bound : sup;
  return phi;
}

Observable Observable::coordinate(double q) {
  Observable phi;
  phi.scalar_rule_ = [](double x) { return x; };
  phi.q_ = q;
  phi.kind_ = NormKind::Lipschitz;
  phi.banach_ = 2.0;  // sup 1 + slope 1 on [0,1]
  phi.sup_bound_ = 1.0;
  return phi;
}

Observable Observable::hat(double lo, double hi, double ramp, double q) {
  if (!(ramp > 0.0) || !(lo < hi)) throw Error("bad_argument", "hat needs lo < hi and ramp > 0");
  Observable phi;
  phi.scalar_rule_ = [lo, hi, ramp](double x) {
    if (x <= lo || x >= hi + ramp) return 0.0;
    if (x < lo + ramp) return (x - lo) / ramp;
    if (x <= hi) return 1.0;
    return (hi + ramp - x) / ramp;
  };
  phi.q_ = q;
  phi.kind_ = NormKind::Lipschitz;
  phi.banach_ = 1.0 + 1.0 / ramp;
  phi.sup_bound_ = 1.0;
  return phi;
}

Observable Observable::indicator(double lo, double hi, double q) {
  if (!(lo < hi)) throw Error("bad_argument", "indicator needs lo < hi");
  Observable phi;
  phi.scalar_rule_ = [lo, hi](double x) { return (x > lo && x <= hi) ? 1.0 : 0.0; };
  phi.q_ = q;
  phi.kind_ = NormKind::BV;
  phi.banach_ = 3.0;  // sup 1 + total variation 2
  phi.sup_bound_ = 1.0;
  return phi;
}

Observable Observable::scalar_function(std::function<double(double)> f, double q, NormKind kind,
                                       double banach_norm, std::optional<double> sup_bound) {
  if (!f) throw Error("bad_argument", "null scalar rule");
  Observable phi;
  phi.scalar_rule_ = std::move(f);
  phi.q_ = q;
  phi.kind_ = kind;
  phi.banach_ = banach_norm;
  phi.sup_bound_ = sup_bound;
  return phi;
}

Observable Observable::window_function(std::function<double(const SymbolWindow&)> f, double q,
                                       double lipschitz, double sup) {
  if (!f) throw Error("bad_argument", "null window rule");
  Observable phi;
  phi.window_rule_ = std::move(f);
  phi.q_ = q;
  phi.kind_ = NormKind::Lipschitz;
  phi.banach_ = sup + lipschitz;
  phi.sup_bound_ = sup;
  return phi;
}

const Eigen::VectorXd& Observable::values() const {
  if (!values_.has_value()) throw Error("bad_argument", "observable has no per-state values");
  return *values_;
}

double Observable::at(int state_index) const {
  const Eigen::VectorXd& v = values();
  if (state_index < 0 || state_index >= v.size()) {
    throw Error("bad_argument", "state index out of range");
  }
  return v[state_index];
}

double Observable::eval_point(double x) const {
  if (scalar_rule_) return scalar_rule_(x);
  // Model samplers emit the state index as a double; per-state values apply.
  if (values_.has_value()) {
    const long long i = std::llround(x);
    if (std::abs(x - static_cast<double>(i)) > 1e-9) {
      throw Error("bad_argument", "values observable evaluated off the state grid");
    }
    return at(static_cast<int>(i));
  }
  throw Error("bad_argument", "observable has no scalar evaluation route");
}

double Observable::eval(const SamplerState& state) const {
  if (std::holds_alternative<double>(state)) return eval_point(std::get<double>(state));
  if (std::holds_alternative<SymbolWindow>(state)) {
    if (!window_rule_) throw Error("bad_argument", "observable has no window rule");
    return window_rule_(std::get<SymbolWindow>(state));
  }
  throw Error("bad_argument", "observable cannot evaluate vector states");
}

Observable Observable::discretized(const FiniteMarkovModel& model) const {
  if (values_.has_value()) {
    if (values_->size() != model.size()) {
      throw Error("bad_argument", "values size does not match the model");
    }
    return *this;
  }
  if (!scalar_rule_) throw Error("bad_argument", "window observables cannot be discretized");
  const Eigen::VectorXd& x = model.coords();
  Eigen::VectorXd v(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) v[i] = scalar_rule_(x[i]);
  Observable phi;
  phi.values_ = std::move(v);
  phi.q_ = q_;
  phi.kind_ = kind_;
  phi.banach_ = banach_;  // declared continuous norm dominates the grid sup
  phi.sup_bound_ = max_abs(*phi.values_);
  return phi;
}

Observable Observable::scaled(double c) const {
  Observable phi = *this;
  if (phi.values_.has_value()) *phi.values_ *= c;
  if (scalar_rule_) {
    auto f = scalar_rule_;
    phi.scalar_rule_ = [f, c](double x) { return c * f(x); };
  }
  if (window_rule_) {
    auto f = window_rule_;
    phi.window_rule_ = [f, c](const SymbolWindow& w) { return c * f(w); };
  }
  phi.banach_ = std::abs(c) * banach_;
  if (sup_bound_.has_value()) phi.sup_bound_ = std::abs(c) * *sup_bound_;
  return phi;
}

Observable Observable::with_q(double q) const {
  Observable phi = *this;
  phi.q_ = q;
  return phi;
}

namespace {

double weighted_mean(const Eigen::VectorXd& weights, const Eigen::VectorXd& values) {
  CompensatedSum s;
  for (Eigen::Index i = 0; i < weights.size(); ++i) s.add(weights[i] * values[i]);
  return s.value();
}

/// Midpoint-quadrature weights of the declared density, normalized to mass 1.
Eigen::VectorXd quadrature_weights(const QuadratureMeasure& measure) {
  if (!measure.density || measure.cells < 1) throw Error("bad_measure", "quadrature measure needs a density and cells >= 1");
  Eigen::VectorXd w(measure.cells);
  CompensatedSum total;
  for (int c = 0; c < measure.cells; ++c) {
    const double x = (c + 0.5) / measure.cells;
    const double d = measure.density(x);
    if (!std::isfinite(d) || d < 0.0) throw Error("bad_measure", "density must be finite and nonnegative");
    w[c] = d;
    total.add(d);
  }
  if (total.value() <= 0.0) throw Error("bad_measure", "density has zero mass");
  w /= total.value();
  return w;
}

Eigen::VectorXd quadrature_points(int cells) {
  Eigen::VectorXd x(cells);
  for (int c = 0; c < cells; ++c) x[c] = (c + 0.5) / cells;
  return x;
}

}  // namespace

double mean_under(const Observable& phi, const FiniteMarkovModel& model) {
  const Observable d = phi.discretized(model);
  return weighted_mean(model.stationary(), d.values());
}

double mean_under(const Observable& phi, const QuadratureMeasure& measure) {
  const Eigen::VectorXd w = quadrature_weights(measure);
  const Eigen::VectorXd x = quadrature_points(measure.cells);
  CompensatedSum s;
  for (Eigen::Index i = 0; i < w.size(); ++i) s.add(w[i] * phi.eval_point(x[i]));
  return s.value();
}

namespace {

double centering_scale(const Observable& phi) {
  double scale = 1.0;
  if (phi.sup_bound().has_value()) scale = std::max(scale, *phi.sup_bound());
  return scale;
}

}  // namespace

Observable center(const Observable& phi, const FiniteMarkovModel& model) {
  const Observable d = phi.discretized(model);
  const double mean = weighted_mean(model.stationary(), d.values());
  if (std::abs(mean) <= 1e-13 * centering_scale(d)) return d;
  Eigen::VectorXd v = d.values();
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] -= mean;
  const double sup = max_abs(v);
  double banach = 0.0;
  if (d.norm_kind() == NormKind::Sup) {
    banach = sup;
  } else {
    banach = d.banach_norm() + std::abs(mean);  // norm of the subtracted constant
  }
  return Observable::from_values(std::move(v), d.q(), d.norm_kind(), banach, sup);
}

Observable center(const Observable& phi, const QuadratureMeasure& measure) {
  if (!phi.has_rule()) throw Error("bad_argument", "centering under a quadrature measure needs a rule");
  const double mean = mean_under(phi, measure);
  if (std::abs(mean) <= 1e-13 * centering_scale(phi)) return phi;
  // Every declared norm grows by at most the norm of the subtracted constant.
  std::optional<double> sup;
  if (phi.sup_bound().has_value()) sup = *phi.sup_bound() + std::abs(mean);
  return Observable::scalar_function(
      [phi, mean](double x) { return phi.eval_point(x) - mean; }, phi.q(), phi.norm_kind(),
      phi.banach_norm() + std::abs(mean), sup);
}

namespace {

NormProfile profile_from_weights(const Eigen::VectorXd& weights, const Eigen::VectorXd& values,
                                 const Observable& phi, double q) {
  if (q < 1.0) throw Error("bad_argument", "norm profile needs q >= 1");
  CompensatedSum s1, s2, s3, s4, p2;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    const double w = weights[i];
    const double v = values[i];
    s1.add(w * abs_pow(v, q));
    s2.add(w * abs_pow(v, 2.0 * q));
    s3.add(w * abs_pow(v, 3.0 * q));
    s4.add(w * abs_pow(v, 4.0));
    p2.add(w * v * v);
  }
  NormProfile out;
  out.phi_lq = root_q(s1.value(), q);
  out.phi2_lq = root_q(s2.value(), q);
  out.phi3_lq = root_q(s3.value(), q);
  out.phi4_l1 = s4.value();
  out.phi2_l1 = p2.value();
  out.banach = phi.banach_norm();
  out.m = std::max(1.0, phi.sup_bound().has_value() ? *phi.sup_bound() : max_abs(values));
  out.q = q;
  return out;
}

}  // namespace

NormProfile norm_profile(const Observable& phi, const FiniteMarkovModel& model, double q) {
  const Observable d = phi.discretized(model);
  return profile_from_weights(model.stationary(), d.values(), d, q);
}

NormProfile norm_profile(const Observable& phi, const QuadratureMeasure& measure, double q) {
  if (q < 1.0) throw Error("bad_argument", "norm profile needs q >= 1");
  const Eigen::VectorXd w = quadrature_weights(measure);
  const Eigen::VectorXd x = quadrature_points(measure.cells);
  Eigen::VectorXd v(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) v[i] = phi.eval_point(x[i]);
  return profile_from_weights(w, v, phi, q);
}

}  // namespace fourmoment
