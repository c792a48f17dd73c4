#pragma once

#include "riklr/dataset.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <variant>

namespace riklr {

/// Truncated l1-distance kernel max(eta - ||x - z||_1, 0). Indefinite in general.
struct Tl1Kernel {
  double eta;
};

/// Gaussian kernel exp(-||x - z||^2 / sigma^2). Positive definite.
struct RbfKernel {
  double sigma;
};

using KernelSpec = std::variant<Tl1Kernel, RbfKernel>;

/// The customary TL1 truncation for d-dimensional data, eta = 0.7 d.
inline Tl1Kernel default_tl1(Eigen::Index dim) { return Tl1Kernel{0.7 * static_cast<double>(dim)}; }

/// Throws input_error if the active parameter is not a finite positive number.
void validate(const KernelSpec& spec);

/// Short human-readable form, e.g. "tl1(eta=6.3)".
std::string describe(const KernelSpec& spec);

bool is_positive_definite(const KernelSpec& spec);

double kernel_eval(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& z);

struct GramOptions {
  /// Upper bound on the dense n x n matrix size in bytes.
  std::size_t max_bytes = std::size_t{1} << 31;
  /// Worker count for row partitioning; 0 = hardware concurrency.
  unsigned threads = 1;
};

/// Dense symmetric Gram matrix of the training samples. The lower triangle
/// is evaluated and mirrored, so the result is exactly symmetric.
Eigen::MatrixXd gram_matrix(const KernelSpec& spec, const Eigen::MatrixXd& features,
                            const GramOptions& options = {});

inline Eigen::MatrixXd gram_matrix(const KernelSpec& spec, const Dataset& data,
                                   const GramOptions& options = {}) {
  data.validate();
  return gram_matrix(spec, data.features, options);
}

/// t x n matrix whose entry (j, i) is k(x_i, z_j).
Eigen::MatrixXd kernel_rows(const KernelSpec& spec, const Eigen::MatrixXd& train_features,
                            const Eigen::MatrixXd& test_features);

}  // namespace riklr
