#pragma once

#include "riklr/dataset.hpp"
#include "riklr/model.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace riklr {

// ---------------------------------------------------------------------------
// Ingestion

struct CsvOptions {
  /// Field separator. ' ' splits on any run of blanks and tabs.
  char delimiter = ',';
  bool header = false;
  /// Column holding the label; negative values count from the end (-1 = last).
  int label_column = -1;
  /// Raw label text -> class. When empty, labels must be 0/1 or -1/+1.
  std::map<std::string, int> label_map;
};

/// Reads a delimited file into a Dataset, labels normalized to {0, 1} and
/// row order preserved. Throws parse_error (with row/column) on non-numeric
/// cells, config_error if the label column does not exist, input_error for
/// labels outside {0, 1, -1, +1} (or the label map).
Dataset ingest_csv(const std::string& path, const CsvOptions& options);
Dataset parse_csv(std::istream& is, const CsvOptions& options);

/// Feature matrix of an unlabelled file (every column is a feature).
Eigen::MatrixXd read_features(const std::string& path, const CsvOptions& options);

// ---------------------------------------------------------------------------
// Splits

struct Split {
  Dataset train;
  Dataset test;
  std::vector<Eigen::Index> train_rows;
  std::vector<Eigen::Index> test_rows;
  /// False when a class had a single sample and the split fell back to a plain shuffle.
  bool stratified = true;
};

/// Random halves of sizes ceil(n/2) and floor(n/2), stratified by class and
/// deterministic in `seed`. Requires n >= 4.
Split half_split(const Dataset& data, std::uint64_t seed);

/// Fold id in [0, folds) for every sample, stratified by class.
std::vector<int> stratified_folds(const Eigen::VectorXi& labels, int folds, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Cross-validation and the repeated half-split protocol

enum class KernelKind { tl1, rbf };

struct ExperimentSpec {
  std::string name = "dataset";
  std::string data_path;
  CsvOptions csv;
  /// Z-score features using training-half statistics.
  bool standardize = false;
  std::vector<Variant> variants = {Variant::klr, Variant::l1_rklr, Variant::iklr,
                                   Variant::l1_riklr};
  /// Candidate values for lambda, lambda1 and sigma.
  std::vector<double> grid = {0.0001, 0.001, 0.01, 0.1, 1.0, 5.0, 10.0};
  int repeats = 10;
  int cv_folds = 5;
  std::uint64_t base_seed = 0;
  double tau = 1e-6;
  double sparsity_threshold = 1e-10;
  /// TL1 truncation; 0.7 d when unset.
  std::optional<double> tl1_eta;
  /// Kernel family per variant; defaults to RBF for KLR / L1-RKLR, TL1 otherwise.
  std::map<Variant, KernelKind> kernel_overrides;
  SolverConfig solver;
  /// 0 = hardware concurrency. Results do not depend on this value.
  unsigned threads = 0;

  KernelKind kernel_kind(Variant v) const;
  void validate() const;
};

struct HyperParams {
  double lambda = 0.0;
  double lambda1 = 0.0;
  std::optional<double> sigma;
};

/// Solver certificates collected over a set of fits.
struct FitAudit {
  std::size_t fits = 0;
  std::size_t converged = 0;
  std::size_t max_iteration_fits = 0;
  std::size_t inner_failures = 0;
  /// Smallest f_k - f_{k+1} - ||step||^2 / (2 gamma_k) seen.
  double min_descent_slack = 0.0;
  /// Largest terminal stationarity residual / epsilon_outer among converged fits.
  double max_residual_ratio = 0.0;

  void record(const SolveTrace& trace, double epsilon_outer);
  void merge(const FitAudit& other);
};

struct GridScore {
  HyperParams params;
  double mean_accuracy = 0.0;
  bool failed = false;
};

struct CvResult {
  HyperParams best;
  double best_accuracy = 0.0;
  std::vector<GridScore> scores;
  std::vector<std::string> warnings;
  FitAudit audit;
};

/// The hyperparameter grid for a variant, in evaluation order.
std::vector<HyperParams> make_grid(const ExperimentSpec& spec, Variant variant);

/// Exhaustive grid search by mean fold accuracy. Ties go to the larger
/// lambda1, then the larger lambda, then the larger sigma. A grid point
/// whose fold fit throws scores 0, adds a warning and cannot be selected;
/// throws numerical_error when no grid point is left. Sees only `train`.
CvResult cv_select(const ExperimentSpec& spec, Variant variant, const Dataset& train,
                   std::uint64_t seed);

/// Spec used to fit `variant` with the given hyperparameters on data of dimension `dim`.
ModelSpec model_spec_for(const ExperimentSpec& spec, Variant variant, const HyperParams& params,
                         Eigen::Index dim);

struct RunRecord {
  int repeat = 0;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
  HyperParams chosen;
  double cv_accuracy = 0.0;
  double accuracy = 0.0;
  std::size_t selected = 0;
  std::size_t train_size = 0;
  SolveStatus status = SolveStatus::converged;
  int outer_iterations = 0;
  double final_residual = 0.0;
  double min_descent_slack = 0.0;
};

struct VariantSummary {
  Variant variant = Variant::l1_riklr;
  KernelKind kernel = KernelKind::tl1;
  double mean_accuracy = 0.0;
  /// Sample standard deviation (n - 1 denominator); 0 for a single run.
  double std_accuracy = 0.0;
  double mean_selected = 0.0;
  int runs_ok = 0;
  int runs_failed = 0;
  std::vector<RunRecord> runs;
  /// Covers every fit of the variant, cross-validation fits included.
  FitAudit audit;
};

struct ExperimentReport {
  std::string dataset;
  Eigen::Index n = 0;
  Eigen::Index d = 0;
  /// Spectrum of the TL1 Gram matrix of the full dataset.
  SpectrumStats tl1_stats;
  double tl1_eta = 0.0;
  bool standardized = false;
  /// Mean test accuracy of predicting the training-half majority class.
  double majority_baseline = 0.0;
  std::vector<VariantSummary> variants;
  std::vector<std::string> warnings;
};

/// Repeats r = 0..repeats-1 with seed base_seed + r: half split, cv_select
/// on the training half, refit on the whole training half, score the test half.
ExperimentReport run_experiment(const ExperimentSpec& spec, const Dataset& data);
/// Same, ingesting spec.data_path first.
ExperimentReport run_experiment(const ExperimentSpec& spec);

/// Machine-readable report (schema "riklr-report", version 1).
std::string report_to_json(const ExperimentReport& report);
/// Aligned plain-text tables: dataset statistics and accuracy (active coefficients).
void write_report_text(std::ostream& os, const std::vector<ExperimentReport>& reports);

double mean(const std::vector<double>& xs);
/// Sample standard deviation with n - 1 denominator; 0 when fewer than two values.
double sample_std(const std::vector<double>& xs);

}  // namespace riklr
