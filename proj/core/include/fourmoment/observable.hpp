#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fourmoment/model.hpp"

namespace fourmoment {

/// Which Banach norm the observable's declared norm refers to.
/// Finite models compute in the sup norm; Lipschitz and BV norms are declared
/// metadata (sup + Lipschitz constant, sup + total variation) that feed the
/// logarithmic factors of the moment bounds and are never inferred.
enum class NormKind { Sup, Lipschitz, BV };

std::string to_string(NormKind kind);
NormKind norm_kind_from_string(const std::string& s);

/// State emitted by a trajectory sampler: a point of [0,1] or R (interval maps,
/// AR(1), linear processes), a vector state (matrix AR), or a truncated symbol
/// window (subshifts).
using SymbolWindow = std::vector<int>;
using SamplerState = std::variant<double, Eigen::VectorXd, SymbolWindow>;

/// Real-valued observable. Two evaluation routes exist and at least one is set:
/// per-state values on a finite model, and/or an analytic rule on sampler
/// states. Carries the integrability exponent q and the declared Banach norm.
class Observable {
 public:
  /// Per-state values. banach_norm defaults to max|values| (sup norm); when
  /// given explicitly it must dominate max|values|.
  static Observable from_values(Eigen::VectorXd values, double q = 2.0,
                                NormKind kind = NormKind::Sup,
                                std::optional<double> banach_norm = std::nullopt,
                                std::optional<double> sup_bound = std::nullopt);

  /// x |-> x on [0,1]; Lipschitz with sup = 1, slope 1, banach = 2.
  static Observable coordinate(double q = 2.0);

  /// Continuous ramp approximation of the indicator of (lo, hi]: 0 outside
  /// [lo, hi+ramp], rises linearly on [lo, lo+ramp], 1 on [lo+ramp, hi], falls
  /// on [hi, hi+ramp]. Slope 1/ramp, sup 1, banach = 1 + 1/ramp (Lipschitz).
  static Observable hat(double lo, double hi, double ramp, double q = 2.0);

  /// Indicator of (lo, hi]; BV with sup 1 and variation 2, banach = 3.
  static Observable indicator(double lo, double hi, double q = 2.0);

  /// Arbitrary scalar rule with declared norms.
  static Observable scalar_function(std::function<double(double)> f, double q, NormKind kind,
                                    double banach_norm, std::optional<double> sup_bound = std::nullopt);

  /// Rule on symbol windows with declared Lipschitz constant (w.r.t. the
  /// 2^-k word metric) and sup bound; banach = sup + lipschitz.
  static Observable window_function(std::function<double(const SymbolWindow&)> f, double q,
                                    double lipschitz, double sup);

  bool has_values() const noexcept { return values_.has_value(); }
  bool has_rule() const noexcept { return static_cast<bool>(scalar_rule_) || static_cast<bool>(window_rule_); }
  const Eigen::VectorXd& values() const;

  /// Value at finite-model state index (values route required).
  double at(int state_index) const;
  /// Analytic evaluation at a real point (scalar rule required).
  double eval_point(double x) const;
  /// Evaluation on a sampler state; dispatches on the variant alternative.
  double eval(const SamplerState& state) const;

  double q() const noexcept { return q_; }
  NormKind norm_kind() const noexcept { return kind_; }
  double banach_norm() const noexcept { return banach_; }
  std::optional<double> sup_bound() const noexcept { return sup_bound_; }

  /// Evaluate the analytic rule at the model's state coordinates, producing a
  /// values observable with the same declared metadata. Identity when values
  /// are already attached.
  Observable discretized(const FiniteMarkovModel& model) const;

  /// c * phi with exactly scaled metadata.
  Observable scaled(double c) const;
  Observable with_q(double q) const;

 private:
  Observable() = default;

  std::optional<Eigen::VectorXd> values_;
  std::function<double(double)> scalar_rule_;
  std::function<double(const SymbolWindow&)> window_rule_;
  double q_ = 2.0;
  NormKind kind_ = NormKind::Sup;
  double banach_ = 0.0;
  std::optional<double> sup_bound_;
};

/// The norm data consumed by the fourth-moment bounds, measured under the
/// stationary law:
///   phi4_l1 = E|phi|^4, phi3_lq = (E|phi|^{3q})^{1/q}, phi2_lq = (E|phi|^{2q})^{1/q},
///   phi2_l1 = E phi^2,  phi_lq  = (E|phi|^q)^{1/q},
///   banach  = declared Banach norm, m = max{1, sup|phi| over probed states}.
struct NormProfile {
  double phi4_l1 = 0.0;
  double phi3_lq = 0.0;
  double phi2_lq = 0.0;
  double phi2_l1 = 0.0;
  double phi_lq = 0.0;
  double banach = 0.0;
  double m = 1.0;
  double q = 2.0;
};

/// Reference measure for observables on [0,1] when no finite model is in play:
/// composite midpoint quadrature of a declared density. `provenance` must say
/// where the density comes from; it is carried into reports.
struct QuadratureMeasure {
  std::function<double(double)> density;
  int cells = 1 << 16;
  std::string provenance;
};

double mean_under(const Observable& phi, const FiniteMarkovModel& model);
double mean_under(const Observable& phi, const QuadratureMeasure& measure);

/// Subtract the stationary mean. Already-centered observables (|mean| below
/// 1e-13 * scale) are returned unchanged, which makes centering idempotent.
/// Sup-norm metadata is recomputed exactly from the centered values; declared
/// Lipschitz/BV norms grow by |mean| (norm of the subtracted constant).
Observable center(const Observable& phi, const FiniteMarkovModel& model);
Observable center(const Observable& phi, const QuadratureMeasure& measure);

/// Norm profile with explicit exponent q >= 1 (throws Error{bad_argument} for
/// q < 1; the moment bounds assume at least L^1).
NormProfile norm_profile(const Observable& phi, const FiniteMarkovModel& model, double q);
NormProfile norm_profile(const Observable& phi, const QuadratureMeasure& measure, double q);

}  // namespace fourmoment
