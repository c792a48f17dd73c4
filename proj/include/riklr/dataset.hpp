#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace riklr {

/// Binary classification data: one sample per row of `features`, labels in {0, 1}.
struct Dataset {
  Eigen::MatrixXd features;  // n x d
  Eigen::VectorXi labels;    // n, entries 0 or 1

  Eigen::Index size() const { return features.rows(); }
  Eigen::Index dim() const { return features.cols(); }

  /// Throws input_error unless n >= 2, d >= 1, all features finite and
  /// every label is 0 or 1.
  void validate() const;

  /// validate() plus at least one sample of each class.
  void validate_for_training() const;

  /// Number of samples with label 1.
  Eigen::Index positives() const;

  /// Labels mapped to {-1, +1}.
  Eigen::VectorXd signed_labels() const;

  /// Rows selected by `rows`, in the given order.
  Dataset subset(const std::vector<Eigen::Index>& rows) const;
};

/// Per-column affine map x -> (x - mean) / scale.
struct Standardizer {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd scale;

  /// Z-score statistics of `features`; constant columns get scale 1.
  static Standardizer fit(const Eigen::MatrixXd& features);

  Eigen::MatrixXd apply(const Eigen::MatrixXd& features) const;
};

}  // namespace riklr
