#pragma once

#include <Eigen/Dense>

#include <string>

namespace riklr {

/// Eigenpairs of a symmetric matrix, eigenvalues in non-increasing order.
struct Eigensystem {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;  // column i pairs with values[i]
};

/// Throws input_error if K is not square, has non-finite entries or is
/// asymmetric beyond 1e-12 (relative to max(1, max|K_ij|)); numerical_error
/// if the eigensolver does not converge.
Eigensystem sym_eigendecompose(const Eigen::MatrixXd& K);

/// The split K = K+ - K- into two positive definite matrices obtained by
/// shifting the spectrum by tau, plus the factor B with B^T B = K+.
///
///   K+ = U diag(mu_1 + tau, ..., mu_m + tau, tau, ..., tau) U^T
///   K- = U diag(tau, ..., tau, tau - mu_{m+1}, ..., tau - mu_n) U^T
///   B  = diag(sqrt(mu_1 + tau), ..., sqrt(tau)) U^T
///
/// where m counts the non-negative eigenvalues (zero goes to the K+ side).
/// Immutable once built and shared by reference between fits.
struct GramDecomposition {
  Eigen::MatrixXd K;
  Eigen::VectorXd eigvals;
  Eigen::MatrixXd U;
  Eigen::Index m = 0;
  double tau = 0.0;
  Eigen::MatrixXd Kplus;
  Eigen::MatrixXd Kminus;
  Eigen::MatrixXd B;

  Eigen::Index size() const { return K.rows(); }
  double mu_max() const { return eigvals[0]; }
  double mu_min() const { return eigvals[eigvals.size() - 1]; }
  /// max |mu_i|, the spectral norm of K.
  double spectral_norm() const;
};

/// Builds the decomposition from a precomputed eigensystem of K.
/// Throws input_error if tau <= 0 or the shapes disagree.
GramDecomposition positive_decompose(const Eigen::MatrixXd& K, const Eigensystem& eig, double tau);

/// sym_eigendecompose followed by positive_decompose.
GramDecomposition decompose_gram(const Eigen::MatrixXd& K, double tau);

/// Spectrum summary of a Gram matrix, the source of Table-1-style rows.
struct SpectrumStats {
  Eigen::Index n = 0;
  double mu_min = 0.0;
  double mu_max = 0.0;
  Eigen::Index m = 0;
  double tau = 0.0;
};

SpectrumStats spectrum_stats(const GramDecomposition& decomp);

/// One-line JSON record {"n":..,"mu_min":..,"mu_max":..,"m":..,"tau":..}.
std::string to_json(const SpectrumStats& stats);

}  // namespace riklr
