#include "riklr/dataset.hpp"

#include "riklr/error.hpp"

#include <cmath>
#include <string>

namespace riklr {

void Dataset::validate() const {
  if (features.rows() != labels.size()) {
    throw input_error("dataset: " + std::to_string(features.rows()) + " feature rows but " +
                      std::to_string(labels.size()) + " labels");
  }
  if (features.rows() < 2) throw input_error("dataset: need at least 2 samples");
  if (features.cols() < 1) throw input_error("dataset: need at least 1 feature");
  if (!features.allFinite()) throw input_error("dataset: non-finite feature value");
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) {
      throw input_error("dataset: label " + std::to_string(labels[i]) + " at row " +
                        std::to_string(i) + " is not 0 or 1");
    }
  }
}

void Dataset::validate_for_training() const {
  validate();
  const Eigen::Index pos = positives();
  if (pos == 0 || pos == size()) {
    throw input_error("dataset: training data must contain both classes");
  }
}

Eigen::Index Dataset::positives() const { return labels.sum(); }

Eigen::VectorXd Dataset::signed_labels() const {
  return (2 * labels.array() - 1).cast<double>().matrix();
}

Dataset Dataset::subset(const std::vector<Eigen::Index>& rows) const {
  Dataset out;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), features.cols());
  out.labels.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    out.features.row(i) = features.row(rows[k]);
    out.labels[i] = labels[rows[k]];
  }
  return out;
}

Standardizer Standardizer::fit(const Eigen::MatrixXd& features) {
  Standardizer s;
  const auto n = static_cast<double>(features.rows());
  s.mean = features.colwise().mean();
  s.scale.resize(features.cols());
  for (Eigen::Index j = 0; j < features.cols(); ++j) {
    const double var = (features.col(j).array() - s.mean[j]).square().sum() / n;
    const double sd = std::sqrt(var);
    s.scale[j] = sd > 0.0 ? sd : 1.0;
  }
  return s;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& features) const {
  if (features.cols() != mean.size()) {
    throw input_error("standardizer: feature dimension mismatch");
  }
  return (features.rowwise() - mean).array().rowwise() / scale.array();
}

}  // namespace riklr
