#include "riklr/kernel.hpp"

#include "riklr/error.hpp"
#include "riklr/parallel.hpp"

#include <cmath>
#include <sstream>

namespace riklr {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Row-level evaluation without per-entry validation; callers check shapes once.
template <typename A, typename B>
double eval_unchecked(const KernelSpec& spec, const A& x, const B& z) {
  return std::visit(overloaded{
                        [&](const Tl1Kernel& k) {
                          const double dist = (x - z).cwiseAbs().sum();
                          return std::max(k.eta - dist, 0.0);
                        },
                        [&](const RbfKernel& k) {
                          const double sq = (x - z).squaredNorm();
                          return std::exp(-sq / (k.sigma * k.sigma));
                        },
                    },
                    spec);
}

}  // namespace

void validate(const KernelSpec& spec) {
  std::visit(overloaded{
                 [](const Tl1Kernel& k) {
                   if (!(std::isfinite(k.eta) && k.eta > 0.0)) {
                     throw input_error("tl1 kernel: eta must be positive");
                   }
                 },
                 [](const RbfKernel& k) {
                   if (!(std::isfinite(k.sigma) && k.sigma > 0.0)) {
                     throw input_error("rbf kernel: sigma must be positive");
                   }
                 },
             },
             spec);
}

std::string describe(const KernelSpec& spec) {
  std::ostringstream os;
  std::visit(overloaded{
                 [&](const Tl1Kernel& k) { os << "tl1(eta=" << k.eta << ")"; },
                 [&](const RbfKernel& k) { os << "rbf(sigma=" << k.sigma << ")"; },
             },
             spec);
  return os.str();
}

bool is_positive_definite(const KernelSpec& spec) {
  return std::holds_alternative<RbfKernel>(spec);
}

double kernel_eval(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& z) {
  validate(spec);
  if (x.size() != z.size()) {
    throw input_error("kernel_eval: dimension mismatch (" + std::to_string(x.size()) + " vs " +
                      std::to_string(z.size()) + ")");
  }
  if (!x.allFinite() || !z.allFinite()) throw input_error("kernel_eval: non-finite input");
  return eval_unchecked(spec, x, z);
}

Eigen::MatrixXd gram_matrix(const KernelSpec& spec, const Eigen::MatrixXd& features,
                            const GramOptions& options) {
  validate(spec);
  if (!features.allFinite()) throw input_error("gram_matrix: non-finite feature value");
  const Eigen::Index n = features.rows();
  const double bytes = static_cast<double>(n) * static_cast<double>(n) * sizeof(double);
  if (bytes > static_cast<double>(options.max_bytes)) {
    throw resource_error("gram_matrix: " + std::to_string(n) + " x " + std::to_string(n) +
                         " matrix exceeds the memory cap of " +
                         std::to_string(options.max_bytes) + " bytes");
  }

  // Samples as columns so each kernel evaluation reads contiguous memory.
  const Eigen::MatrixXd xt = features.transpose();
  Eigen::MatrixXd gram(n, n);
  parallel_for(static_cast<std::size_t>(n), options.threads, [&](std::size_t row) {
    const auto i = static_cast<Eigen::Index>(row);
    for (Eigen::Index j = 0; j <= i; ++j) {
      gram(i, j) = eval_unchecked(spec, xt.col(i), xt.col(j));
    }
  });
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) gram(i, j) = gram(j, i);
  }
  return gram;
}

Eigen::MatrixXd kernel_rows(const KernelSpec& spec, const Eigen::MatrixXd& train_features,
                            const Eigen::MatrixXd& test_features) {
  validate(spec);
  if (train_features.cols() != test_features.cols()) {
    throw input_error("kernel_rows: test dimension " + std::to_string(test_features.cols()) +
                      " does not match training dimension " +
                      std::to_string(train_features.cols()));
  }
  if (!train_features.allFinite() || !test_features.allFinite()) {
    throw input_error("kernel_rows: non-finite feature value");
  }
  const Eigen::MatrixXd xt = train_features.transpose();
  const Eigen::MatrixXd zt = test_features.transpose();
  Eigen::MatrixXd rows(test_features.rows(), train_features.rows());
  for (Eigen::Index i = 0; i < xt.cols(); ++i) {
    for (Eigen::Index j = 0; j < zt.cols(); ++j) {
      rows(j, i) = eval_unchecked(spec, xt.col(i), zt.col(j));
    }
  }
  return rows;
}

}  // namespace riklr
