#include "riklr/objective.hpp"

#include "riklr/error.hpp"

#include <cmath>

namespace riklr {

double softplus(double u) { return std::max(u, 0.0) + std::log1p(std::exp(-std::abs(u))); }

double sigmoid(double u) {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

Eigen::VectorXd soft_threshold(const Eigen::Ref<const Eigen::VectorXd>& v, double t) {
  if (!(t >= 0.0)) throw input_error("soft_threshold: threshold must be non-negative");
  Eigen::VectorXd out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double a = v[i];
    out[i] = a > t ? a - t : (a < -t ? a + t : 0.0);
  }
  return out;
}

DcObjective::DcObjective(std::shared_ptr<const GramDecomposition> decomp, Eigen::VectorXd y_signed,
                         double lambda, double lambda1, double loss_weight)
    : decomp_(std::move(decomp)),
      y_(std::move(y_signed)),
      lambda_(lambda),
      lambda1_(lambda1),
      loss_weight_(loss_weight) {
  if (!decomp_) throw input_error("objective: missing Gram decomposition");
  if (y_.size() != decomp_->size()) {
    throw input_error("objective: label count does not match Gram size");
  }
  for (Eigen::Index i = 0; i < y_.size(); ++i) {
    if (y_[i] != 1.0 && y_[i] != -1.0) throw input_error("objective: signed labels must be +-1");
  }
  if (!(std::isfinite(lambda_) && lambda_ > 0.0)) {
    throw input_error("objective: lambda must be positive");
  }
  if (!(std::isfinite(lambda1_) && lambda1_ >= 0.0)) {
    throw input_error("objective: lambda1 must be non-negative");
  }
  if (!(std::isfinite(loss_weight_) && loss_weight_ >= 0.0)) {
    throw input_error("objective: loss weight must be non-negative");
  }
}

void DcObjective::check(const Eigen::VectorXd& alpha) const {
  if (alpha.size() != size()) throw input_error("objective: alpha has the wrong length");
  if (!alpha.allFinite()) throw input_error("objective: non-finite alpha");
}

double DcObjective::loss_from_scores(const Eigen::VectorXd& scores) const {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < scores.size(); ++i) sum += softplus(-y_[i] * scores[i]);
  return loss_weight_ * sum / static_cast<double>(size());
}

Eigen::VectorXd DcObjective::loss_grad_from_scores(const Eigen::VectorXd& scores) const {
  // d/ds_i softplus(-y_i s_i) = -y_i sigmoid(-y_i s_i)
  Eigen::VectorXd w(scores.size());
  for (Eigen::Index i = 0; i < scores.size(); ++i) w[i] = -y_[i] * sigmoid(-y_[i] * scores[i]);
  w *= loss_weight_ / static_cast<double>(size());
  return decomp_->K * w;
}

double DcObjective::logistic_loss(const Eigen::VectorXd& alpha) const {
  check(alpha);
  return loss_from_scores(decomp_->K * alpha);
}

double DcObjective::f_value(const Eigen::VectorXd& alpha) const {
  check(alpha);
  const Eigen::VectorXd scores = decomp_->K * alpha;
  return loss_from_scores(scores) + 0.5 * lambda_ * alpha.dot(scores) +
         lambda1_ * alpha.lpNorm<1>();
}

double DcObjective::g_value(const Eigen::VectorXd& alpha) const {
  check(alpha);
  return loss_from_scores(decomp_->K * alpha) + 0.5 * lambda_ * (decomp_->B * alpha).squaredNorm() +
         lambda1_ * alpha.lpNorm<1>();
}

double DcObjective::h_value(const Eigen::VectorXd& alpha) const {
  check(alpha);
  return 0.5 * lambda_ * alpha.dot(decomp_->Kminus * alpha);
}

Eigen::VectorXd DcObjective::smooth_grad_g(const Eigen::VectorXd& alpha) const {
  check(alpha);
  return loss_grad_from_scores(decomp_->K * alpha) + lambda_ * (decomp_->Kplus * alpha);
}

Eigen::VectorXd DcObjective::grad_h(const Eigen::VectorXd& alpha) const {
  check(alpha);
  return lambda_ * (decomp_->Kminus * alpha);
}

double DcObjective::grad_h_lipschitz() const {
  return lambda_ * (decomp_->tau - std::min(decomp_->mu_min(), 0.0));
}

}  // namespace riklr
