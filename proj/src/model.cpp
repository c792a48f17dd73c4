#include "riklr/model.hpp"

#include "riklr/error.hpp"
#include "riklr/json_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>

namespace riklr {

namespace {
constexpr const char* kModelFormat = "riklr-model";
constexpr int kModelSchemaVersion = 1;
}  // namespace

const char* to_string(Variant v) {
  switch (v) {
    case Variant::klr: return "klr";
    case Variant::l1_rklr: return "l1-rklr";
    case Variant::iklr: return "iklr";
    case Variant::l1_riklr: return "l1-riklr";
  }
  return "unknown";
}

Variant parse_variant(const std::string& name) {
  std::string key;
  for (char c : name) key += c == '_' ? '-' : static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (key == "klr") return Variant::klr;
  if (key == "l1-rklr") return Variant::l1_rklr;
  if (key == "iklr") return Variant::iklr;
  if (key == "l1-riklr") return Variant::l1_riklr;
  throw config_error("unknown model variant '" + name + "'");
}

bool has_l1_penalty(Variant v) { return v == Variant::l1_rklr || v == Variant::l1_riklr; }

KernelSpec default_kernel(Variant v, Eigen::Index dim, double sigma) {
  if (v == Variant::klr || v == Variant::l1_rklr) return RbfKernel{sigma};
  return default_tl1(dim);
}

void ModelSpec::validate() const {
  riklr::validate(kernel);
  if (!(std::isfinite(lambda) && lambda > 0.0)) throw input_error("model: lambda must be positive");
  if (!(std::isfinite(lambda1) && lambda1 >= 0.0)) {
    throw input_error("model: lambda1 must be non-negative");
  }
  if (!(std::isfinite(tau) && tau > 0.0)) throw input_error("model: tau must be positive");
  if (!(sparsity_threshold >= 0.0)) throw input_error("model: sparsity threshold must be >= 0");
  solver.validate();
}

FittedModel::FittedModel(Variant variant, KernelSpec kernel, double lambda, double lambda1,
                         double tau, Eigen::VectorXd alpha, Eigen::MatrixXd train_features,
                         double sparsity_threshold, SolveTrace trace)
    : variant_(variant),
      kernel_(kernel),
      lambda_(lambda),
      lambda1_(lambda1),
      tau_(tau),
      alpha_(std::move(alpha)),
      train_features_(std::move(train_features)),
      sparsity_threshold_(sparsity_threshold),
      trace_(std::move(trace)) {
  if (alpha_.size() != train_features_.rows()) {
    throw input_error("model: alpha length does not match the retained training size");
  }
  for (Eigen::Index i = 0; i < alpha_.size(); ++i) {
    if (std::abs(alpha_[i]) > sparsity_threshold_) support_.push_back(i);
  }
}

FittedModel FittedModel::with_threshold(double threshold) const {
  return FittedModel(variant_, kernel_, lambda_, lambda1_, tau_, alpha_, train_features_,
                     threshold, trace_);
}

Eigen::VectorXd FittedModel::decision_function(const Eigen::MatrixXd& test_features) const {
  return kernel_rows(kernel_, train_features_, test_features) * alpha_;
}

double score_to_probability(double score) {
  constexpr double lo = std::numeric_limits<double>::denorm_min();
  const double hi = std::nextafter(1.0, 0.0);
  double p = std::clamp(sigmoid(score), lo, hi);
  if (score < 0.0) p = std::min(p, std::nextafter(0.5, 0.0));
  return p;
}

Eigen::VectorXd FittedModel::predict_proba(const Eigen::MatrixXd& test_features) const {
  return decision_function(test_features).unaryExpr(&score_to_probability);
}

Eigen::VectorXi FittedModel::predict_label(const Eigen::MatrixXd& test_features) const {
  const Eigen::VectorXd p = predict_proba(test_features);
  return (p.array() >= 0.5).cast<int>().matrix();
}

double accuracy(const Eigen::VectorXi& predicted, const Eigen::VectorXi& truth) {
  if (predicted.size() != truth.size() || truth.size() == 0) {
    throw input_error("accuracy: label vectors must be non-empty and equally long");
  }
  return static_cast<double>((predicted.array() == truth.array()).count()) /
         static_cast<double>(truth.size());
}

DcObjective make_objective(const ModelSpec& spec, const Dataset& train,
                           std::shared_ptr<const GramDecomposition> decomp) {
  return DcObjective(std::move(decomp), train.signed_labels(), spec.lambda,
                     spec.effective_lambda1());
}

FittedModel fit_decomposed(const ModelSpec& spec, const Dataset& train,
                           std::shared_ptr<const GramDecomposition> decomp) {
  spec.validate();
  train.validate_for_training();
  if (!decomp || decomp->size() != train.size()) {
    throw input_error("fit: decomposition does not match the training set");
  }
  const DcObjective obj = make_objective(spec, train, std::move(decomp));
  FitResult res = pla_fit(obj, spec.solver);
  return FittedModel(spec.variant, spec.kernel, spec.lambda, spec.effective_lambda1(), spec.tau,
                     std::move(res.alpha), train.features, spec.sparsity_threshold,
                     std::move(res.trace));
}

FittedModel fit(const ModelSpec& spec, const Dataset& train) {
  spec.validate();
  train.validate_for_training();
  auto decomp = std::make_shared<const GramDecomposition>(
      decompose_gram(gram_matrix(spec.kernel, train.features), spec.tau));
  return fit_decomposed(spec, train, std::move(decomp));
}

void save_model(std::ostream& os, const FittedModel& model) {
  nlohmann::ordered_json j;
  j["format"] = kModelFormat;
  j["schema_version"] = kModelSchemaVersion;
  j["variant"] = to_string(model.variant());
  j["kernel"] = kernel_to_json(model.kernel());
  j["lambda"] = model.lambda();
  j["lambda1"] = model.lambda1();
  j["tau"] = model.tau();
  j["sparsity_threshold"] = model.sparsity_threshold();
  j["status"] = to_string(model.status());
  j["outer_iterations"] = model.trace().outer_iterations();
  j["final_objective"] = model.trace().final_objective();
  j["active_coefficients"] = model.selected_count();
  j["alpha"] = vector_to_json(model.alpha());
  j["train_features"] = matrix_to_json(model.train_features());
  os << j.dump(1) << '\n';
}

FittedModel load_model(std::istream& is) {
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw input_error(std::string("model file: ") + e.what());
  }
  try {
    if (j.value("format", std::string{}) != kModelFormat) {
      throw input_error("model file: not a riklr model");
    }
    const int version = j.at("schema_version").get<int>();
    if (version != kModelSchemaVersion) {
      throw input_error("model file: unsupported schema version " + std::to_string(version));
    }
    SolveTrace trace;
    trace.status = j.value("status", std::string{}) == "converged" ? SolveStatus::converged
                                                                    : SolveStatus::max_iterations;
    trace.f_initial = j.value("final_objective", 0.0);
    return FittedModel(parse_variant(j.at("variant").get<std::string>()),
                       kernel_from_json(j.at("kernel")), j.at("lambda").get<double>(),
                       j.at("lambda1").get<double>(), j.at("tau").get<double>(),
                       vector_from_json(j.at("alpha")), matrix_from_json(j.at("train_features")),
                       j.at("sparsity_threshold").get<double>(), std::move(trace));
  } catch (const nlohmann::json::exception& e) {
    throw input_error(std::string("model file: ") + e.what());
  }
}

void save_model(const std::string& path, const FittedModel& model) {
  std::ofstream os(path);
  if (!os) throw input_error("cannot write model file '" + path + "'");
  save_model(os, model);
}

FittedModel load_model(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw input_error("cannot read model file '" + path + "'");
  return load_model(is);
}

}  // namespace riklr
