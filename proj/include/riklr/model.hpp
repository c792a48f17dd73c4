#pragma once

#include "riklr/dataset.hpp"
#include "riklr/kernel.hpp"
#include "riklr/objective.hpp"
#include "riklr/solver.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace riklr {

/// The four kernel logistic regression models. KLR and L1-RKLR use a
/// positive definite (RBF) kernel by default, IKLR and L1-RIKLR the
/// indefinite TL1 kernel. The plain variants carry no l1 penalty.
enum class Variant { klr, l1_rklr, iklr, l1_riklr };

const char* to_string(Variant v);
/// Accepts "klr", "l1-rklr", "iklr", "l1-riklr" (case-insensitive, '_' or '-').
Variant parse_variant(const std::string& name);
bool has_l1_penalty(Variant v);
/// RBF(sigma) for KLR / L1-RKLR, TL1(0.7 d) for IKLR / L1-RIKLR.
KernelSpec default_kernel(Variant v, Eigen::Index dim, double sigma = 1.0);

struct ModelSpec {
  Variant variant = Variant::l1_riklr;
  KernelSpec kernel = Tl1Kernel{1.0};
  double lambda = 1e-2;
  double lambda1 = 1e-2;  // ignored (treated as 0) for KLR and IKLR
  double tau = 1e-6;
  double sparsity_threshold = 1e-10;
  SolverConfig solver;

  /// lambda1 after applying the variant rule.
  double effective_lambda1() const { return has_l1_penalty(variant) ? lambda1 : 0.0; }
  void validate() const;
};

class FittedModel {
 public:
  FittedModel(Variant variant, KernelSpec kernel, double lambda, double lambda1, double tau,
              Eigen::VectorXd alpha, Eigen::MatrixXd train_features, double sparsity_threshold,
              SolveTrace trace = {});

  Variant variant() const { return variant_; }
  const KernelSpec& kernel() const { return kernel_; }
  double lambda() const { return lambda_; }
  double lambda1() const { return lambda1_; }
  double tau() const { return tau_; }
  const Eigen::VectorXd& alpha() const { return alpha_; }
  const Eigen::MatrixXd& train_features() const { return train_features_; }
  double sparsity_threshold() const { return sparsity_threshold_; }
  const SolveTrace& trace() const { return trace_; }
  SolveStatus status() const { return trace_.status; }

  /// Indices i with |alpha_i| > sparsity_threshold (active coefficients).
  const std::vector<Eigen::Index>& support() const { return support_; }
  std::size_t selected_count() const { return support_.size(); }

  /// Copy with a different sparsity threshold.
  FittedModel with_threshold(double threshold) const;

  /// Scores K_z alpha for each test row.
  Eigen::VectorXd decision_function(const Eigen::MatrixXd& test_features) const;
  /// P(label = 1) = exp(s) / (1 + exp(s)), strictly inside (0, 1); below 0.5
  /// exactly when the score is negative.
  Eigen::VectorXd predict_proba(const Eigen::MatrixXd& test_features) const;
  /// 1 where the probability is >= 0.5 (score >= 0), else 0.
  Eigen::VectorXi predict_label(const Eigen::MatrixXd& test_features) const;

 private:
  Variant variant_;
  KernelSpec kernel_;
  double lambda_;
  double lambda1_;
  double tau_;
  Eigen::VectorXd alpha_;
  Eigen::MatrixXd train_features_;
  double sparsity_threshold_;
  SolveTrace trace_;
  std::vector<Eigen::Index> support_;
};

/// Probability from a score, clamped into (0, 1) and kept below 0.5 for s < 0.
double score_to_probability(double score);

double accuracy(const Eigen::VectorXi& predicted, const Eigen::VectorXi& truth);

/// Gram matrix -> eigendecomposition -> positive decomposition -> PLA.
/// Throws input_error for invalid specs or single-class data. A solver that
/// hits max_outer still returns a model, with status() == max_iterations.
FittedModel fit(const ModelSpec& spec, const Dataset& train);

/// Same pipeline from a decomposition of the training Gram matrix that the
/// caller already holds (shared across hyperparameter settings).
FittedModel fit_decomposed(const ModelSpec& spec, const Dataset& train,
                           std::shared_ptr<const GramDecomposition> decomp);

/// The objective minimized by fit_decomposed.
DcObjective make_objective(const ModelSpec& spec, const Dataset& train,
                           std::shared_ptr<const GramDecomposition> decomp);

/// Versioned JSON model file. Doubles are written with round-trip precision,
/// so a reloaded model predicts bitwise identically.
void save_model(std::ostream& os, const FittedModel& model);
FittedModel load_model(std::istream& is);
void save_model(const std::string& path, const FittedModel& model);
FittedModel load_model(const std::string& path);

}  // namespace riklr
