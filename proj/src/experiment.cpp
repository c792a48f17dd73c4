#include "riklr/experiment.hpp"

#include "riklr/error.hpp"
#include "riklr/json_io.hpp"
#include "riklr/parallel.hpp"
#include "riklr/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <tuple>

namespace riklr {

// ---------------------------------------------------------------------------
// Splits

namespace {

std::vector<std::vector<Eigen::Index>> shuffled_classes(const Eigen::VectorXi& labels,
                                                        std::mt19937_64& rng) {
  std::vector<std::vector<Eigen::Index>> classes(2);
  for (Eigen::Index i = 0; i < labels.size(); ++i) classes[labels[i] == 1 ? 1 : 0].push_back(i);
  for (auto& c : classes) portable_shuffle(c, rng);
  return classes;
}

}  // namespace

Split half_split(const Dataset& data, std::uint64_t seed) {
  data.validate();
  const Eigen::Index n = data.size();
  if (n < 4) throw input_error("half_split: need at least 4 samples");

  std::mt19937_64 rng(seed);
  auto classes = shuffled_classes(data.labels, rng);
  Split split;
  split.stratified = classes[0].size() >= 2 && classes[1].size() >= 2;

  std::vector<Eigen::Index> order;
  order.reserve(static_cast<std::size_t>(n));
  if (split.stratified) {
    // Classes back to back, then alternate: each class is halved as evenly as possible.
    for (const auto& c : classes) order.insert(order.end(), c.begin(), c.end());
    for (std::size_t p = 0; p < order.size(); ++p) {
      (p % 2 == 0 ? split.train_rows : split.test_rows).push_back(order[p]);
    }
  } else {
    order.resize(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    portable_shuffle(order, rng);
    const auto train_size = static_cast<std::size_t>((n + 1) / 2);
    split.train_rows.assign(order.begin(), order.begin() + static_cast<long>(train_size));
    split.test_rows.assign(order.begin() + static_cast<long>(train_size), order.end());
  }
  std::sort(split.train_rows.begin(), split.train_rows.end());
  std::sort(split.test_rows.begin(), split.test_rows.end());
  split.train = data.subset(split.train_rows);
  split.test = data.subset(split.test_rows);
  return split;
}

std::vector<int> stratified_folds(const Eigen::VectorXi& labels, int folds, std::uint64_t seed) {
  if (folds < 2) throw input_error("stratified_folds: need at least 2 folds");
  if (labels.size() < folds) throw input_error("stratified_folds: fewer samples than folds");
  std::mt19937_64 rng(seed);
  const auto classes = shuffled_classes(labels, rng);
  std::vector<int> fold_of(static_cast<std::size_t>(labels.size()));
  std::size_t p = 0;
  for (const auto& c : classes) {
    for (Eigen::Index i : c) fold_of[static_cast<std::size_t>(i)] = static_cast<int>(p++ % static_cast<std::size_t>(folds));
  }
  return fold_of;
}

// ---------------------------------------------------------------------------
// Spec and audit

KernelKind ExperimentSpec::kernel_kind(Variant v) const {
  if (const auto it = kernel_overrides.find(v); it != kernel_overrides.end()) return it->second;
  return (v == Variant::klr || v == Variant::l1_rklr) ? KernelKind::rbf : KernelKind::tl1;
}

void ExperimentSpec::validate() const {
  if (variants.empty()) throw config_error("experiment: no model variants");
  if (grid.empty()) throw config_error("experiment: empty hyperparameter grid");
  for (double g : grid) {
    if (!(std::isfinite(g) && g > 0.0)) throw config_error("experiment: grid values must be positive");
  }
  if (repeats < 1) throw config_error("experiment: repeats must be at least 1");
  if (cv_folds < 2) throw config_error("experiment: cv_folds must be at least 2");
  if (!(std::isfinite(tau) && tau > 0.0)) throw config_error("experiment: tau must be positive");
  if (tl1_eta && !(std::isfinite(*tl1_eta) && *tl1_eta > 0.0)) {
    throw config_error("experiment: tl1 eta must be positive");
  }
  solver.validate();
}

void FitAudit::record(const SolveTrace& trace, double epsilon_outer) {
  if (fits == 0) min_descent_slack = std::numeric_limits<double>::infinity();
  ++fits;
  inner_failures += static_cast<std::size_t>(trace.inner_failures);
  min_descent_slack = std::min(min_descent_slack, trace.min_descent_slack());
  if (trace.status == SolveStatus::converged) {
    ++converged;
    max_residual_ratio = std::max(max_residual_ratio, trace.final_residual() / epsilon_outer);
  } else {
    ++max_iteration_fits;
  }
}

void FitAudit::merge(const FitAudit& other) {
  if (other.fits == 0) return;
  if (fits == 0) {
    *this = other;
    return;
  }
  fits += other.fits;
  converged += other.converged;
  max_iteration_fits += other.max_iteration_fits;
  inner_failures += other.inner_failures;
  min_descent_slack = std::min(min_descent_slack, other.min_descent_slack);
  max_residual_ratio = std::max(max_residual_ratio, other.max_residual_ratio);
}

// ---------------------------------------------------------------------------
// Cross-validation

std::vector<HyperParams> make_grid(const ExperimentSpec& spec, Variant variant) {
  const std::vector<double> no_l1{0.0};
  const auto& l1_values = has_l1_penalty(variant) ? spec.grid : no_l1;
  const bool rbf = spec.kernel_kind(variant) == KernelKind::rbf;
  std::vector<HyperParams> grid;
  for (double lambda : spec.grid) {
    for (double lambda1 : l1_values) {
      if (rbf) {
        for (double sigma : spec.grid) grid.push_back({lambda, lambda1, sigma});
      } else {
        grid.push_back({lambda, lambda1, std::nullopt});
      }
    }
  }
  return grid;
}

ModelSpec model_spec_for(const ExperimentSpec& spec, Variant variant, const HyperParams& params,
                         Eigen::Index dim) {
  ModelSpec ms;
  ms.variant = variant;
  if (spec.kernel_kind(variant) == KernelKind::rbf) {
    ms.kernel = RbfKernel{params.sigma.value_or(1.0)};
  } else {
    ms.kernel = Tl1Kernel{spec.tl1_eta.value_or(default_tl1(dim).eta)};
  }
  ms.lambda = params.lambda;
  ms.lambda1 = params.lambda1;
  ms.tau = spec.tau;
  ms.sparsity_threshold = spec.sparsity_threshold;
  ms.solver = spec.solver;
  return ms;
}

namespace {

struct FoldData {
  Dataset fit;
  Dataset val;
  std::shared_ptr<const GramDecomposition> decomp;
  Eigen::MatrixXd val_rows;
  std::string error;
};

double kernel_parameter(const KernelSpec& k) {
  if (const auto* t = std::get_if<Tl1Kernel>(&k)) return t->eta;
  return std::get<RbfKernel>(k).sigma;
}

bool prefer(const HyperParams& a, const HyperParams& b) {
  const double sa = a.sigma.value_or(0.0);
  const double sb = b.sigma.value_or(0.0);
  return std::tie(a.lambda1, a.lambda, sa) > std::tie(b.lambda1, b.lambda, sb);
}

std::string describe(const HyperParams& p) {
  char buf[128];
  if (p.sigma) {
    std::snprintf(buf, sizeof buf, "lambda=%g lambda1=%g sigma=%g", p.lambda, p.lambda1, *p.sigma);
  } else {
    std::snprintf(buf, sizeof buf, "lambda=%g lambda1=%g", p.lambda, p.lambda1);
  }
  return buf;
}

}  // namespace

CvResult cv_select(const ExperimentSpec& spec, Variant variant, const Dataset& train,
                   std::uint64_t seed) {
  spec.validate();
  train.validate_for_training();
  const auto grid = make_grid(spec, variant);
  const auto folds = static_cast<std::size_t>(spec.cv_folds);
  const auto fold_of = stratified_folds(train.labels, spec.cv_folds, seed);

  // One kernel per distinct sigma (a single TL1 kernel otherwise); the Gram
  // decomposition of each training fold is shared by all (lambda, lambda1).
  std::vector<KernelSpec> kernels;
  std::vector<std::size_t> kernel_of(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const KernelSpec k = model_spec_for(spec, variant, grid[g], train.dim()).kernel;
    auto it = std::find_if(kernels.begin(), kernels.end(), [&](const KernelSpec& other) {
      return other.index() == k.index() && kernel_parameter(other) == kernel_parameter(k);
    });
    if (it == kernels.end()) {
      kernels.push_back(k);
      it = kernels.end() - 1;
    }
    kernel_of[g] = static_cast<std::size_t>(it - kernels.begin());
  }

  std::vector<FoldData> fold_data(kernels.size() * folds);
  parallel_for(fold_data.size(), spec.threads, [&](std::size_t t) {
    const std::size_t kernel = t / folds;
    const int fold = static_cast<int>(t % folds);
    std::vector<Eigen::Index> fit_rows, val_rows;
    for (std::size_t i = 0; i < fold_of.size(); ++i) {
      (fold_of[i] == fold ? val_rows : fit_rows).push_back(static_cast<Eigen::Index>(i));
    }
    FoldData& fd = fold_data[t];
    fd.fit = train.subset(fit_rows);
    fd.val = train.subset(val_rows);
    try {
      fd.decomp = std::make_shared<const GramDecomposition>(
          decompose_gram(gram_matrix(kernels[kernel], fd.fit.features), spec.tau));
      fd.val_rows = kernel_rows(kernels[kernel], fd.fit.features, fd.val.features);
    } catch (const std::exception& e) {
      fd.error = e.what();
    }
  });

  const std::size_t tasks = grid.size() * folds;
  std::vector<double> fold_accuracy(tasks, 0.0);
  std::vector<std::string> fold_error(tasks);
  std::vector<FitAudit> audits(tasks);
  parallel_for(tasks, spec.threads, [&](std::size_t t) {
    const std::size_t g = t / folds;
    const FoldData& fd = fold_data[kernel_of[g] * folds + t % folds];
    try {
      if (!fd.error.empty()) throw numerical_error(fd.error);
      const ModelSpec ms = model_spec_for(spec, variant, grid[g], train.dim());
      const FittedModel model = fit_decomposed(ms, fd.fit, fd.decomp);
      const Eigen::VectorXd scores = fd.val_rows * model.alpha();
      const Eigen::VectorXi predicted =
          scores.unaryExpr([](double s) { return score_to_probability(s) >= 0.5 ? 1 : 0; });
      fold_accuracy[t] = accuracy(predicted, fd.val.labels);
      audits[t].record(model.trace(), ms.solver.epsilon_outer);
    } catch (const std::exception& e) {
      fold_error[t] = e.what();
    }
  });

  CvResult result;
  for (const auto& a : audits) result.audit.merge(a);
  bool have_best = false;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    GridScore score{grid[g], 0.0, false};
    double sum = 0.0;
    for (std::size_t f = 0; f < folds; ++f) {
      const std::size_t t = g * folds + f;
      if (!fold_error[t].empty()) {
        score.failed = true;
        result.warnings.push_back("cv " + std::string(to_string(variant)) + " " +
                                  describe(grid[g]) + " fold " + std::to_string(f) +
                                  " failed: " + fold_error[t]);
        break;
      }
      sum += fold_accuracy[t];
    }
    score.mean_accuracy = score.failed ? 0.0 : sum / static_cast<double>(folds);
    result.scores.push_back(score);
    if (score.failed) continue;

    constexpr double tie = 1e-12;
    if (!have_best || score.mean_accuracy > result.best_accuracy + tie ||
        (std::abs(score.mean_accuracy - result.best_accuracy) <= tie &&
         prefer(score.params, result.best))) {
      result.best = score.params;
      result.best_accuracy = score.mean_accuracy;
      have_best = true;
    }
  }
  if (!have_best) throw numerical_error("cv_select: every grid point failed");
  return result;
}

// ---------------------------------------------------------------------------
// Protocol

double mean(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double sample_std(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

ExperimentReport run_experiment(const ExperimentSpec& spec, const Dataset& data) {
  spec.validate();
  data.validate();

  ExperimentReport report;
  report.dataset = spec.name;
  report.n = data.size();
  report.d = data.dim();
  report.standardized = spec.standardize;
  report.tl1_eta = spec.tl1_eta.value_or(default_tl1(data.dim()).eta);
  {
    const Eigen::MatrixXd features =
        spec.standardize ? Standardizer::fit(data.features).apply(data.features) : data.features;
    report.tl1_stats = spectrum_stats(
        decompose_gram(gram_matrix(Tl1Kernel{report.tl1_eta}, features), spec.tau));
  }

  report.variants.resize(spec.variants.size());
  for (std::size_t v = 0; v < spec.variants.size(); ++v) {
    report.variants[v].variant = spec.variants[v];
    report.variants[v].kernel = spec.kernel_kind(spec.variants[v]);
  }

  std::vector<double> baseline;
  for (int r = 0; r < spec.repeats; ++r) {
    const std::uint64_t seed = spec.base_seed + static_cast<std::uint64_t>(r);
    Split split = half_split(data, seed);
    if (!split.stratified) {
      report.warnings.push_back("repeat " + std::to_string(r) +
                                ": a class has a single sample; split is not stratified");
    }
    if (spec.standardize) {
      const Standardizer s = Standardizer::fit(split.train.features);
      split.train.features = s.apply(split.train.features);
      split.test.features = s.apply(split.test.features);
    }
    const int majority = 2 * split.train.positives() >= split.train.size() ? 1 : 0;
    baseline.push_back(accuracy(Eigen::VectorXi::Constant(split.test.size(), majority),
                                split.test.labels));

    for (std::size_t v = 0; v < spec.variants.size(); ++v) {
      const Variant variant = spec.variants[v];
      VariantSummary& summary = report.variants[v];
      RunRecord run;
      run.repeat = r;
      run.seed = seed;
      run.train_size = static_cast<std::size_t>(split.train.size());
      try {
        const CvResult cv = cv_select(spec, variant, split.train, mix_seed(seed, v + 1));
        for (const auto& w : cv.warnings) report.warnings.push_back("repeat " + std::to_string(r) + ": " + w);
        summary.audit.merge(cv.audit);
        run.chosen = cv.best;
        run.cv_accuracy = cv.best_accuracy;

        const ModelSpec ms = model_spec_for(spec, variant, cv.best, split.train.dim());
        const FittedModel model = fit(ms, split.train);
        FitAudit final_audit;
        final_audit.record(model.trace(), ms.solver.epsilon_outer);
        summary.audit.merge(final_audit);

        run.accuracy = accuracy(model.predict_label(split.test.features), split.test.labels);
        run.selected = model.selected_count();
        run.status = model.status();
        run.outer_iterations = model.trace().outer_iterations();
        run.final_residual = model.trace().final_residual();
        run.min_descent_slack = model.trace().min_descent_slack();
      } catch (const std::exception& e) {
        run.failed = true;
        run.error = e.what();
        report.warnings.push_back("repeat " + std::to_string(r) + " " + to_string(variant) +
                                  " failed: " + e.what());
      }
      summary.runs.push_back(std::move(run));
    }
  }
  report.majority_baseline = mean(baseline);

  for (auto& summary : report.variants) {
    std::vector<double> acc, selected;
    for (const auto& run : summary.runs) {
      if (run.failed) {
        ++summary.runs_failed;
        continue;
      }
      ++summary.runs_ok;
      acc.push_back(run.accuracy);
      selected.push_back(static_cast<double>(run.selected));
    }
    summary.mean_accuracy = mean(acc);
    summary.std_accuracy = sample_std(acc);
    summary.mean_selected = mean(selected);
  }
  return report;
}

ExperimentReport run_experiment(const ExperimentSpec& spec) {
  return run_experiment(spec, ingest_csv(spec.data_path, spec.csv));
}

// ---------------------------------------------------------------------------
// Reports

namespace {

nlohmann::ordered_json finite_or_null(double v) {
  return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
}

nlohmann::ordered_json params_json(const HyperParams& p) {
  nlohmann::ordered_json j;
  j["lambda"] = p.lambda;
  j["lambda1"] = p.lambda1;
  if (p.sigma) j["sigma"] = *p.sigma;
  return j;
}

const char* kernel_name(KernelKind k) { return k == KernelKind::tl1 ? "tl1" : "rbf"; }

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[96];
  std::snprintf(buf, sizeof buf, pattern, a, b, c);
  return buf;
}

}  // namespace

std::string report_to_json(const ExperimentReport& report) {
  nlohmann::ordered_json j;
  j["format"] = "riklr-report";
  j["schema_version"] = 1;
  j["dataset"] = report.dataset;
  j["n"] = report.n;
  j["d"] = report.d;
  j["standardized"] = report.standardized;
  j["tl1"] = {{"eta", report.tl1_eta},
              {"mu_min", report.tl1_stats.mu_min},
              {"mu_max", report.tl1_stats.mu_max},
              {"m", report.tl1_stats.m},
              {"tau", report.tl1_stats.tau}};
  j["majority_baseline"] = report.majority_baseline;
  j["variants"] = nlohmann::ordered_json::array();
  for (const auto& s : report.variants) {
    nlohmann::ordered_json v;
    v["variant"] = to_string(s.variant);
    v["kernel"] = kernel_name(s.kernel);
    v["mean_accuracy"] = s.mean_accuracy;
    v["std_accuracy"] = s.std_accuracy;
    v["mean_active_coefficients"] = s.mean_selected;
    v["runs_ok"] = s.runs_ok;
    v["runs_failed"] = s.runs_failed;
    v["audit"] = {{"fits", s.audit.fits},
                  {"converged", s.audit.converged},
                  {"max_iteration_fits", s.audit.max_iteration_fits},
                  {"inner_failures", s.audit.inner_failures},
                  {"min_descent_slack", finite_or_null(s.audit.min_descent_slack)},
                  {"max_residual_over_epsilon", s.audit.max_residual_ratio}};
    v["runs"] = nlohmann::ordered_json::array();
    for (const auto& run : s.runs) {
      nlohmann::ordered_json rj;
      rj["repeat"] = run.repeat;
      rj["seed"] = run.seed;
      rj["failed"] = run.failed;
      if (run.failed) {
        rj["error"] = run.error;
      } else {
        rj["chosen"] = params_json(run.chosen);
        rj["cv_accuracy"] = run.cv_accuracy;
        rj["accuracy"] = run.accuracy;
        rj["active_coefficients"] = run.selected;
        rj["train_size"] = run.train_size;
        rj["status"] = to_string(run.status);
        rj["outer_iterations"] = run.outer_iterations;
        rj["final_residual"] = run.final_residual;
        rj["min_descent_slack"] = finite_or_null(run.min_descent_slack);
      }
      v["runs"].push_back(std::move(rj));
    }
    j["variants"].push_back(std::move(v));
  }
  j["warnings"] = report.warnings;
  return j.dump(1);
}

void write_report_text(std::ostream& os, const std::vector<ExperimentReport>& reports) {
  char line[256];
  os << "Dataset statistics (TL1 kernel Gram matrix of the full dataset)\n";
  std::snprintf(line, sizeof line, "%-14s %5s %6s %8s %12s %12s %s\n", "Dataset", "d", "n", "eta",
                "mu_min", "mu_max", "features");
  os << line;
  for (const auto& r : reports) {
    std::snprintf(line, sizeof line, "%-14s %5ld %6ld %8.4g %12.4f %12.2f %s\n", r.dataset.c_str(),
                  static_cast<long>(r.d), static_cast<long>(r.n), r.tl1_eta, r.tl1_stats.mu_min,
                  r.tl1_stats.mu_max, r.standardized ? "z-scored" : "raw");
    os << line;
  }

  // Column set: every variant that appears in any report, in canonical order.
  std::vector<Variant> columns;
  for (Variant v : {Variant::klr, Variant::l1_rklr, Variant::iklr, Variant::l1_riklr}) {
    for (const auto& r : reports) {
      if (std::any_of(r.variants.begin(), r.variants.end(),
                      [&](const VariantSummary& s) { return s.variant == v; })) {
        columns.push_back(v);
        break;
      }
    }
  }
  os << "\nTest accuracy +- std (mean active coefficients)\n";
  std::snprintf(line, sizeof line, "%-14s", "Dataset");
  os << line;
  for (Variant v : columns) {
    std::snprintf(line, sizeof line, " %-24s", to_string(v));
    os << line;
  }
  os << '\n';
  for (const auto& r : reports) {
    std::snprintf(line, sizeof line, "%-14s", r.dataset.c_str());
    os << line;
    for (Variant v : columns) {
      const auto it = std::find_if(r.variants.begin(), r.variants.end(),
                                   [&](const VariantSummary& s) { return s.variant == v; });
      std::string cell = "-";
      if (it != r.variants.end() && it->runs_ok > 0) {
        cell = fmt("%.3f +- %.3f (%.0f)", it->mean_accuracy, it->std_accuracy, it->mean_selected);
        if (it->runs_failed > 0) cell += " [" + std::to_string(it->runs_failed) + " failed]";
      } else if (it != r.variants.end()) {
        cell = "all runs failed";
      }
      std::snprintf(line, sizeof line, " %-24s", cell.c_str());
      os << line;
    }
    os << '\n';
  }
}

}  // namespace riklr
