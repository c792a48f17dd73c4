#pragma once

#include "riklr/spectral.hpp"

#include <Eigen/Dense>

#include <memory>

namespace riklr {

/// ln(1 + e^u) without overflow: max(u, 0) + log1p(e^{-|u|}).
double softplus(double u);

/// 1 / (1 + e^{-u}) without overflow.
double sigmoid(double u);

/// Componentwise sign(v_i) max(|v_i| - t, 0): the proximal map of t ||.||_1.
Eigen::VectorXd soft_threshold(const Eigen::Ref<const Eigen::VectorXd>& v, double t);

/// The regularized indefinite kernel logistic regression objective
///
///   f(a) = (1/n) sum_i ln(1 + exp(-y_i (K a)_i)) + (lambda/2) a^T K a + lambda1 ||a||_1
///
/// and its DC split f = g - h with
///
///   g(a) = loss(a) + (lambda/2) ||B a||^2 + lambda1 ||a||_1,   h(a) = (lambda/2) a^T K- a.
///
/// lambda1 = 0 gives the smooth (IKLR / KLR) objective. `loss_weight` scales
/// the data term and is 1 for every model; other values exist for tests that
/// isolate the quadratic part.
class DcObjective {
 public:
  DcObjective(std::shared_ptr<const GramDecomposition> decomp, Eigen::VectorXd y_signed,
              double lambda, double lambda1, double loss_weight = 1.0);

  const GramDecomposition& decomp() const { return *decomp_; }
  const std::shared_ptr<const GramDecomposition>& decomp_ptr() const { return decomp_; }
  const Eigen::VectorXd& y_signed() const { return y_; }
  double lambda() const { return lambda_; }
  double lambda1() const { return lambda1_; }
  double loss_weight() const { return loss_weight_; }
  Eigen::Index size() const { return y_.size(); }

  /// Mean logistic loss (times loss_weight) given precomputed scores K a.
  double loss_from_scores(const Eigen::VectorXd& scores) const;
  /// Gradient of the weighted loss w.r.t. alpha given scores K a.
  Eigen::VectorXd loss_grad_from_scores(const Eigen::VectorXd& scores) const;

  double logistic_loss(const Eigen::VectorXd& alpha) const;
  double f_value(const Eigen::VectorXd& alpha) const;
  double g_value(const Eigen::VectorXd& alpha) const;
  double h_value(const Eigen::VectorXd& alpha) const;

  /// Gradient of g without the l1 term: grad loss + lambda K+ a.
  Eigen::VectorXd smooth_grad_g(const Eigen::VectorXd& alpha) const;
  /// lambda K- a.
  Eigen::VectorXd grad_h(const Eigen::VectorXd& alpha) const;

  /// Lipschitz constant of grad_h, lambda (tau - mu_n) (lambda tau when K is PSD).
  double grad_h_lipschitz() const;

 private:
  void check(const Eigen::VectorXd& alpha) const;

  std::shared_ptr<const GramDecomposition> decomp_;
  Eigen::VectorXd y_;
  double lambda_;
  double lambda1_;
  double loss_weight_;
};

}  // namespace riklr
