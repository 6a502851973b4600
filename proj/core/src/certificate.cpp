#include "fourmoment/certificate.hpp"

namespace fourmoment {

ErgodicityCertificate::ErgodicityCertificate(double kappa, double theta, double p,
                                             double embedding_c, double algebra_m, int horizon,
                                             std::vector<std::string> probe_names)
    : kappa_(kappa),
      theta_(theta),
      p_(p),
      c_(embedding_c),
      m_(algebra_m),
      horizon_(horizon),
      probe_names_(std::move(probe_names)) {
  if (!(kappa_ > 0.0)) throw Error("bad_argument", "certificate needs kappa > 0");
  if (!(theta_ > 0.0 && theta_ < 1.0)) throw Error("bad_argument", "certificate needs theta in (0,1)");
  if (!(p_ >= 1.0)) throw Error("bad_argument", "certificate needs p >= 1");
  if (!(c_ > 0.0) || !(m_ > 0.0)) throw Error("bad_argument", "certificate constants must be positive");
  if (horizon_ < 1) throw Error("bad_argument", "certificate needs horizon >= 1");
}

void ErgodicityCertificate::record_closure(Eigen::VectorXd phi_values, int cutoff) {
  if (cutoff < 0) throw Error("bad_argument", "closure cutoff must be >= 0");
  closure_ = std::make_pair(std::move(phi_values), cutoff);
}

bool ErgodicityCertificate::covers_closure(const Eigen::VectorXd& phi_values, int cutoff) const {
  if (!closure_) return false;
  if (closure_->second < cutoff) return false;
  if (closure_->first.size() != phi_values.size()) return false;
  for (Eigen::Index i = 0; i < phi_values.size(); ++i) {
    if (closure_->first[i] != phi_values[i]) return false;
  }
  return true;
}

}  // namespace fourmoment
