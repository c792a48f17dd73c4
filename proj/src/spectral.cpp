#include "riklr/spectral.hpp"

#include "riklr/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>

namespace riklr {
namespace {

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& A) { return 0.5 * (A + A.transpose()); }

}  // namespace

double GramDecomposition::spectral_norm() const {
  return std::max(std::abs(mu_max()), std::abs(mu_min()));
}

Eigensystem sym_eigendecompose(const Eigen::MatrixXd& K) {
  if (K.rows() != K.cols()) throw input_error("sym_eigendecompose: matrix is not square");
  if (K.rows() == 0) throw input_error("sym_eigendecompose: empty matrix");
  if (!K.allFinite()) throw input_error("sym_eigendecompose: non-finite entry");
  const double scale = std::max(1.0, K.cwiseAbs().maxCoeff());
  const double asym = (K - K.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * scale) {
    throw input_error("sym_eigendecompose: matrix is not symmetric (max asymmetry " +
                      std::to_string(asym) + ")");
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(K, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw numerical_error("sym_eigendecompose: eigensolver did not converge");
  }
  // Eigen returns ascending order; reverse to mu_1 >= ... >= mu_n.
  Eigensystem eig;
  eig.values = solver.eigenvalues().reverse();
  eig.vectors = solver.eigenvectors().rowwise().reverse();
  return eig;
}

GramDecomposition positive_decompose(const Eigen::MatrixXd& K, const Eigensystem& eig,
                                     double tau) {
  if (!(std::isfinite(tau) && tau > 0.0)) {
    throw input_error("positive_decompose: tau must be positive");
  }
  const Eigen::Index n = K.rows();
  if (K.cols() != n || eig.values.size() != n || eig.vectors.rows() != n ||
      eig.vectors.cols() != n) {
    throw input_error("positive_decompose: eigensystem shape does not match K");
  }

  GramDecomposition d;
  d.K = K;
  d.eigvals = eig.values;
  d.U = eig.vectors;
  d.tau = tau;
  d.m = (eig.values.array() >= 0.0).count();

  Eigen::VectorXd plus(n), minus(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mu = eig.values[i];
    if (mu >= 0.0) {
      plus[i] = mu + tau;
      minus[i] = tau;
    } else {
      plus[i] = tau;
      minus[i] = tau - mu;
    }
  }
  d.Kplus = symmetrized(d.U * plus.asDiagonal() * d.U.transpose());
  d.Kminus = symmetrized(d.U * minus.asDiagonal() * d.U.transpose());
  d.B = plus.cwiseSqrt().asDiagonal() * d.U.transpose();
  return d;
}

GramDecomposition decompose_gram(const Eigen::MatrixXd& K, double tau) {
  return positive_decompose(K, sym_eigendecompose(K), tau);
}

SpectrumStats spectrum_stats(const GramDecomposition& decomp) {
  return SpectrumStats{decomp.size(), decomp.mu_min(), decomp.mu_max(), decomp.m, decomp.tau};
}

std::string to_json(const SpectrumStats& stats) {
  nlohmann::ordered_json j;
  j["n"] = stats.n;
  j["mu_min"] = stats.mu_min;
  j["mu_max"] = stats.mu_max;
  j["m"] = stats.m;
  j["tau"] = stats.tau;
  return j.dump();
}

}  // namespace riklr
