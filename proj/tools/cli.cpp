#include "cli.hpp"

#include "riklr/error.hpp"
#include "riklr/json_io.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace riklr::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

enum class Kind {
  string,
  boolean,
  integer,
  number,
  optional_number,
  number_list,
  string_list,
  label_map,
  string_map
};

const std::map<std::string, Kind>& schema() {
  static const std::map<std::string, Kind> kinds = {
      {"data.name", Kind::string},
      {"data.path", Kind::string},
      {"data.test_path", Kind::string},
      {"data.delimiter", Kind::string},
      {"data.header", Kind::boolean},
      {"data.label_column", Kind::integer},
      {"data.label_map", Kind::label_map},
      {"data.standardize", Kind::boolean},
      {"model.variant", Kind::string},
      {"model.kernel", Kind::string},
      {"model.eta", Kind::optional_number},
      {"model.sigma", Kind::number},
      {"model.lambda", Kind::number},
      {"model.lambda1", Kind::number},
      {"model.tau", Kind::number},
      {"model.sparsity_threshold", Kind::number},
      {"solver.gamma", Kind::number},
      {"solver.gamma_schedule", Kind::number_list},
      {"solver.epsilon_outer", Kind::number},
      {"solver.max_outer", Kind::integer},
      {"solver.epsilon_inner", Kind::number},
      {"solver.max_inner", Kind::integer},
      {"experiment.variants", Kind::string_list},
      {"experiment.grid", Kind::number_list},
      {"experiment.repeats", Kind::integer},
      {"experiment.cv_folds", Kind::integer},
      {"experiment.base_seed", Kind::integer},
      {"experiment.threads", Kind::integer},
      {"experiment.tl1_eta", Kind::optional_number},
      {"experiment.kernel_overrides", Kind::string_map},
      {"output.model", Kind::string},
      {"output.trace", Kind::string},
      {"output.predictions", Kind::string},
      {"output.report_dir", Kind::string},
  };
  return kinds;
}

const char* kind_name(Kind k) {
  switch (k) {
    case Kind::string: return "a string";
    case Kind::boolean: return "true or false";
    case Kind::integer: return "an integer";
    case Kind::number: return "a number";
    case Kind::optional_number: return "a number or null";
    case Kind::number_list: return "an array of numbers";
    case Kind::string_list: return "an array of strings";
    case Kind::label_map: return "an object mapping label text to 0 or 1";
    case Kind::string_map: return "an object of strings";
  }
  return "?";
}

bool matches(Kind k, const json& v) {
  switch (k) {
    case Kind::string: return v.is_string();
    case Kind::boolean: return v.is_boolean();
    case Kind::integer: return v.is_number_integer();
    case Kind::number: return v.is_number();
    case Kind::optional_number: return v.is_null() || v.is_number();
    case Kind::number_list:
      return v.is_array() && std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_number(); });
    case Kind::string_list:
      return v.is_array() && std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_string(); });
    case Kind::label_map:
      return v.is_object() && std::all_of(v.begin(), v.end(), [](const json& e) {
               return e.is_number_integer() && (e.get<int>() == 0 || e.get<int>() == 1);
             });
    case Kind::string_map:
      return v.is_object() && std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_string(); });
  }
  return false;
}

Kind kind_of(const std::string& key) {
  const auto it = schema().find(key);
  if (it == schema().end()) throw config_error("unknown configuration key '" + key + "'");
  return it->second;
}

void set_checked(ordered_json& config, const std::string& key, const json& value) {
  const Kind k = kind_of(key);
  if (!matches(k, value)) {
    throw config_error("configuration key '" + key + "' must be " + kind_name(k) + ", got " + value.dump());
  }
  const auto dot = key.find('.');
  config[key.substr(0, dot)][key.substr(dot + 1)] = value;
}

json read_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw input_error("cannot read configuration file '" + path + "'");
  try {
    return json::parse(is);
  } catch (const json::parse_error& e) {
    throw config_error("configuration file '" + path + "': " + e.what());
  }
}

std::string str(const json& config, const char* section, const char* key) {
  return config.at(section).at(key).get<std::string>();
}

char delimiter_of(const std::string& text) {
  if (text == "whitespace" || text == " ") return ' ';
  if (text == "tab" || text == "\t") return '\t';
  if (text.size() != 1) throw config_error("data.delimiter must be one character, 'tab' or 'whitespace'");
  return text[0];
}

KernelKind kernel_kind_of(const std::string& name) {
  if (name == "tl1") return KernelKind::tl1;
  if (name == "rbf") return KernelKind::rbf;
  throw config_error("unknown kernel '" + name + "' (expected tl1 or rbf)");
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream os(path);
  if (!os) throw input_error("cannot write '" + path + "'");
  os << content;
  if (!os) throw input_error("cannot write '" + path + "'");
}

Dataset load_training_data(const json& config) {
  const std::string path = str(config, "data", "path");
  if (path.empty()) throw config_error("data.path is not set");
  if (config.at("data").at("standardize").get<bool>()) {
    throw config_error("data.standardize is only supported by bench and kernel-stats; model files store raw features");
  }
  return ingest_csv(path, csv_options(config));
}

// ---------------------------------------------------------------------------
// Subcommands

struct CommonArgs {
  std::string config;
  std::vector<std::string> overrides;
  std::string data;
  bool verbose = false;
};

ordered_json resolve(const CommonArgs& a) {
  ordered_json config = build_config(a.config, a.overrides);
  if (!a.data.empty()) config["data"]["path"] = a.data;
  return config;
}

int cmd_train(const CommonArgs& a, const std::string& model_out, const std::string& trace_out,
              std::ostream& out) {
  ordered_json config = resolve(a);
  if (!model_out.empty()) config["output"]["model"] = model_out;
  if (!trace_out.empty()) config["output"]["trace"] = trace_out;

  const Dataset train = load_training_data(config);
  const ModelSpec spec = model_spec(config, train.dim());
  const FittedModel model = fit(spec, train);
  const SolveTrace& trace = model.trace();

  const std::string model_path = str(config, "output", "model");
  if (model_path.empty()) throw config_error("output.model is not set");
  const fs::path mp(model_path);
  if (mp.has_parent_path()) fs::create_directories(mp.parent_path());
  save_model(model_path, model);
  const std::string trace_path = str(config, "output", "trace");
  if (!trace_path.empty()) {
    std::ostringstream csv;
    write_trace_csv(csv, trace);
    write_file(trace_path, csv.str());
  }

  out << "variant: " << to_string(model.variant()) << '\n'
      << "kernel: " << describe(model.kernel()) << '\n'
      << "samples: " << train.size() << " x " << train.dim() << '\n'
      << "status: " << to_string(trace.status) << '\n'
      << "outer_iterations: " << trace.outer_iterations() << '\n'
      << "final_objective: " << fmt(trace.final_objective()) << '\n'
      << "stationarity_residual: " << fmt(trace.final_residual()) << '\n'
      << "active_coefficients: " << model.selected_count() << " / " << train.size() << '\n'
      << "model: " << model_path << '\n';
  if (!trace_path.empty()) out << "trace: " << trace_path << '\n';
  if (trace.inner_failures > 0) out << "inner_failures: " << trace.inner_failures << '\n';

  const std::string test_path = str(config, "data", "test_path");
  if (!test_path.empty()) {
    const Dataset test = ingest_csv(test_path, csv_options(config));
    out << "test_accuracy: " << fmt(accuracy(model.predict_label(test.features), test.labels)) << '\n';
  }
  if (a.verbose) {
    out << "k,f,step_norm,residual,inner_iterations\n";
    for (std::size_t k = 0; k < trace.steps.size(); ++k) {
      const auto& s = trace.steps[k];
      out << k + 1 << ',' << fmt(s.f) << ',' << fmt(s.step_norm) << ',' << fmt(s.residual) << ','
          << s.inner_iterations << '\n';
    }
  }
  return trace.status == SolveStatus::converged ? exit_ok : exit_not_converged;
}

int cmd_predict(const CommonArgs& a, const std::string& model_path, bool labelled,
                const std::string& out_path, std::ostream& out) {
  ordered_json config = resolve(a);
  if (!out_path.empty()) config["output"]["predictions"] = out_path;
  const FittedModel model = load_model(model_path);
  const std::string data_path = str(config, "data", "path");
  if (data_path.empty()) throw config_error("no input data (use --data or data.path)");
  const Eigen::MatrixXd features = labelled ? ingest_csv(data_path, csv_options(config)).features
                                            : read_features(data_path, csv_options(config));
  const Eigen::VectorXd p = model.predict_proba(features);
  std::ostringstream csv;
  csv << std::setprecision(17) << "probability,label\n";
  for (Eigen::Index j = 0; j < p.size(); ++j) csv << p[j] << ',' << (p[j] >= 0.5 ? 1 : 0) << '\n';

  const std::string target = str(config, "output", "predictions");
  if (target.empty()) {
    out << csv.str();
  } else {
    write_file(target, csv.str());
    out << "predictions: " << target << " (" << p.size() << " rows)\n";
  }
  return exit_ok;
}

int cmd_eval(const CommonArgs& a, const std::string& model_path, std::ostream& out) {
  const ordered_json config = resolve(a);
  const FittedModel model = load_model(model_path);
  const std::string data_path = str(config, "data", "path");
  if (data_path.empty()) throw config_error("no input data (use --data or data.path)");
  const Dataset test = ingest_csv(data_path, csv_options(config));
  const Eigen::VectorXi predicted = model.predict_label(test.features);
  out << "samples: " << test.size() << '\n'
      << "accuracy: " << fmt(accuracy(predicted, test.labels)) << '\n'
      << "predicted_positive: " << predicted.sum() << '\n'
      << "active_coefficients: " << model.selected_count() << " / " << model.alpha().size() << '\n';
  return exit_ok;
}

int cmd_kernel_stats(const CommonArgs& a, const std::string& kernel_name, std::ostream& out) {
  const ordered_json config = resolve(a);
  const std::string path = str(config, "data", "path");
  if (path.empty()) throw config_error("data.path is not set");
  const Dataset data = ingest_csv(path, csv_options(config));
  const bool standardize = config.at("data").at("standardize").get<bool>();
  const Eigen::MatrixXd features =
      standardize ? Standardizer::fit(data.features).apply(data.features) : data.features;

  KernelSpec kernel;
  if (kernel_kind_of(kernel_name) == KernelKind::tl1) {
    const json& eta = config.at("model").at("eta");
    kernel = eta.is_null() ? KernelSpec{default_tl1(data.dim())} : KernelSpec{Tl1Kernel{eta.get<double>()}};
  } else {
    kernel = RbfKernel{config.at("model").at("sigma").get<double>()};
  }
  validate(kernel);
  const double tau = config.at("model").at("tau").get<double>();
  const SpectrumStats stats = spectrum_stats(decompose_gram(gram_matrix(kernel, features), tau));

  ordered_json record;
  std::string name = str(config, "data", "name");
  if (name.empty()) name = fs::path(path).stem().string();
  record["dataset"] = name;
  record["d"] = data.dim();
  record["n"] = stats.n;
  record["kernel"] = kernel_to_json(kernel);
  record["standardized"] = standardize;
  record["mu_min"] = stats.mu_min;
  record["mu_max"] = stats.mu_max;
  record["m"] = stats.m;
  record["tau"] = stats.tau;
  out << record.dump() << '\n';
  return exit_ok;
}

int cmd_bench(const std::vector<std::string>& configs, const std::vector<std::string>& overrides,
              const std::string& out_dir, bool verbose, std::ostream& out, std::ostream& err) {
  std::vector<std::string> files = configs;
  if (files.empty()) files.emplace_back();
  std::vector<ExperimentReport> reports;
  std::string report_dir = out_dir;
  int runs_ok = 0, runs_total = 0;
  for (const auto& file : files) {
    const ordered_json config = build_config(file, overrides);
    if (report_dir.empty()) report_dir = str(config, "output", "report_dir");
    const ExperimentSpec spec = experiment_spec(config);
    if (spec.data_path.empty()) throw config_error("data.path is not set");
    ExperimentReport report = run_experiment(spec);
    for (const auto& v : report.variants) {
      runs_ok += v.runs_ok;
      runs_total += v.runs_ok + v.runs_failed;
    }
    if (!report.warnings.empty()) {
      err << report.dataset << ": " << report.warnings.size() << " warning(s)\n";
      if (verbose) {
        for (const auto& w : report.warnings) err << "  " << w << '\n';
      }
    }
    reports.push_back(std::move(report));
  }
  if (report_dir.empty()) throw config_error("output.report_dir is not set");

  ordered_json all;
  all["format"] = "riklr-bench";
  all["version"] = 1;
  all["reports"] = ordered_json::array();
  for (const auto& r : reports) all["reports"].push_back(ordered_json::parse(report_to_json(r)));
  std::ostringstream text;
  write_report_text(text, reports);
  write_file((fs::path(report_dir) / "report.json").string(), all.dump(1) + "\n");
  write_file((fs::path(report_dir) / "report.txt").string(), text.str());
  out << text.str();
  out << "reports: " << (fs::path(report_dir) / "report.json").string() << ", "
      << (fs::path(report_dir) / "report.txt").string() << '\n';
  if (runs_total > 0 && runs_ok == 0) {
    err << "error: every run failed\n";
    return exit_input;
  }
  return exit_ok;
}

}  // namespace

ordered_json default_config() {
  ordered_json c;
  c["data"] = {{"name", ""},         {"path", ""},     {"test_path", ""},
               {"delimiter", ","},   {"header", false}, {"label_column", -1},
               {"label_map", json::object()}, {"standardize", false}};
  c["model"] = {{"variant", "l1-riklr"}, {"kernel", "default"}, {"eta", nullptr},
                {"sigma", 1.0},          {"lambda", 1e-2},      {"lambda1", 1e-2},
                {"tau", 1e-6},           {"sparsity_threshold", 1e-10}};
  const SolverConfig s;
  c["solver"] = {{"gamma", s.gamma},
                 {"gamma_schedule", json::array()},
                 {"epsilon_outer", s.epsilon_outer},
                 {"max_outer", s.max_outer},
                 {"epsilon_inner", s.epsilon_inner},
                 {"max_inner", s.max_inner}};
  const ExperimentSpec e;
  std::vector<std::string> variants;
  for (Variant v : e.variants) variants.emplace_back(to_string(v));
  c["experiment"] = {{"variants", variants},
                     {"grid", e.grid},
                     {"repeats", e.repeats},
                     {"cv_folds", e.cv_folds},
                     {"base_seed", e.base_seed},
                     {"threads", e.threads},
                     {"tl1_eta", nullptr},
                     {"kernel_overrides", json::object()}};
  c["output"] = {{"model", "model.json"}, {"trace", "trace.csv"}, {"predictions", ""}, {"report_dir", "report"}};
  return c;
}

void merge_config(ordered_json& config, const json& overlay) {
  if (!overlay.is_object()) throw config_error("configuration must be a JSON object");
  for (const auto& [section, body] : overlay.items()) {
    if (!config.contains(section)) throw config_error("unknown configuration section '" + section + "'");
    if (!body.is_object()) throw config_error("configuration section '" + section + "' must be an object");
    for (const auto& [key, value] : body.items()) set_checked(config, section + "." + key, value);
  }
}

void apply_override(ordered_json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw config_error("override '" + assignment + "' is not of the form section.key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  const Kind k = kind_of(key);
  json value;
  if (k == Kind::string) {
    value = text;
  } else {
    try {
      value = json::parse(text);
    } catch (const json::parse_error&) {
      throw config_error("override '" + key + "': '" + text + "' is not " + kind_name(k));
    }
  }
  set_checked(config, key, value);
}

ordered_json build_config(const std::string& path, const std::vector<std::string>& overrides) {
  ordered_json config = default_config();
  if (!path.empty()) {
    const json file = read_json_file(path);
    merge_config(config, file);
    const fs::path base = fs::path(path).parent_path();
    for (const char* key : {"path", "test_path"}) {
      const std::string p = config["data"][key].get<std::string>();
      if (!p.empty() && fs::path(p).is_relative() && file.contains("data") && file["data"].contains(key)) {
        config["data"][key] = (base / p).lexically_normal().string();
      }
    }
  }
  for (const auto& o : overrides) apply_override(config, o);
  return config;
}

CsvOptions csv_options(const json& config) {
  const json& d = config.at("data");
  CsvOptions o;
  o.delimiter = delimiter_of(d.at("delimiter").get<std::string>());
  o.header = d.at("header").get<bool>();
  o.label_column = d.at("label_column").get<int>();
  for (const auto& [text, label] : d.at("label_map").items()) o.label_map[text] = label.get<int>();
  return o;
}

ModelSpec model_spec(const json& config, Eigen::Index dim) {
  const json& m = config.at("model");
  ModelSpec spec;
  spec.variant = parse_variant(m.at("variant").get<std::string>());
  const std::string kernel = m.at("kernel").get<std::string>();
  const double sigma = m.at("sigma").get<double>();
  const json& eta = m.at("eta");
  const bool tl1 = kernel == "default" ? std::holds_alternative<Tl1Kernel>(default_kernel(spec.variant, dim))
                                       : kernel_kind_of(kernel) == KernelKind::tl1;
  if (tl1) {
    spec.kernel = eta.is_null() ? default_tl1(dim) : Tl1Kernel{eta.get<double>()};
  } else {
    spec.kernel = RbfKernel{sigma};
  }
  spec.lambda = m.at("lambda").get<double>();
  spec.lambda1 = m.at("lambda1").get<double>();
  spec.tau = m.at("tau").get<double>();
  spec.sparsity_threshold = m.at("sparsity_threshold").get<double>();
  spec.solver = solver_from_json(config.at("solver"));
  spec.validate();
  return spec;
}

ExperimentSpec experiment_spec(const json& config) {
  const json& e = config.at("experiment");
  ExperimentSpec spec;
  spec.data_path = str(config, "data", "path");
  spec.name = str(config, "data", "name");
  if (spec.name.empty()) spec.name = fs::path(spec.data_path).stem().string();
  spec.csv = csv_options(config);
  spec.standardize = config.at("data").at("standardize").get<bool>();
  spec.variants.clear();
  for (const auto& v : e.at("variants")) spec.variants.push_back(parse_variant(v.get<std::string>()));
  spec.grid = e.at("grid").get<std::vector<double>>();
  spec.repeats = e.at("repeats").get<int>();
  spec.cv_folds = e.at("cv_folds").get<int>();
  const auto seed = e.at("base_seed").get<long long>();
  if (seed < 0) throw config_error("experiment.base_seed must be non-negative");
  spec.base_seed = static_cast<std::uint64_t>(seed);
  const auto threads = e.at("threads").get<int>();
  if (threads < 0) throw config_error("experiment.threads must be non-negative");
  spec.threads = static_cast<unsigned>(threads);
  if (!e.at("tl1_eta").is_null()) spec.tl1_eta = e.at("tl1_eta").get<double>();
  for (const auto& [variant, kernel] : e.at("kernel_overrides").items()) {
    spec.kernel_overrides[parse_variant(variant)] = kernel_kind_of(kernel.get<std::string>());
  }
  spec.tau = config.at("model").at("tau").get<double>();
  spec.sparsity_threshold = config.at("model").at("sparsity_threshold").get<double>();
  spec.solver = solver_from_json(config.at("solver"));
  spec.validate();
  return spec;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sparse kernel logistic regression with indefinite kernels", "riklr"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "riklr 1.0.0");

  auto add_common = [](CLI::App* sub, CommonArgs& a) {
    sub->add_option("-c,--config", a.config, "JSON configuration file");
    sub->add_option("-s,--set", a.overrides, "Override a configuration key (section.key=value)");
    sub->add_option("-d,--data", a.data, "Data file (overrides data.path)");
    sub->add_flag("-v,--verbose", a.verbose, "More output");
  };

  CommonArgs train_args, predict_args, eval_args, stats_args;
  std::string model_out, trace_out, predict_model, eval_model, predict_out, kernel_name = "tl1";
  bool labelled = false;

  auto* train = app.add_subcommand("train", "Fit a model and write it with its solver trace");
  add_common(train, train_args);
  train->add_option("--model-out", model_out, "Model file (overrides output.model)");
  train->add_option("--trace-out", trace_out, "Trace CSV (overrides output.trace)");

  auto* predict = app.add_subcommand("predict", "Write probabilities and labels for a feature file");
  add_common(predict, predict_args);
  predict->add_option("-m,--model", predict_model, "Model file")->required();
  predict->add_option("-o,--out", predict_out, "Output CSV (overrides output.predictions; default stdout)");
  predict->add_flag("--labelled", labelled, "The input file carries a label column (ignored)");

  auto* eval = app.add_subcommand("eval", "Accuracy of a model on a labelled file");
  add_common(eval, eval_args);
  eval->add_option("-m,--model", eval_model, "Model file")->required();

  auto* stats = app.add_subcommand("kernel-stats", "Gram matrix spectrum summary of a dataset");
  add_common(stats, stats_args);
  stats->add_option("-k,--kernel", kernel_name, "tl1 or rbf")->check(CLI::IsMember({"tl1", "rbf"}));

  std::vector<std::string> bench_configs, bench_overrides;
  std::string bench_out;
  bool bench_verbose = false;
  auto* bench = app.add_subcommand("bench", "Repeated half-split benchmark with cross-validated grid search");
  bench->add_option("-c,--config", bench_configs, "JSON configuration file, one per dataset");
  bench->add_option("-s,--set", bench_overrides, "Override a configuration key for every dataset");
  bench->add_option("-o,--out", bench_out, "Report directory (overrides output.report_dir)");
  bench->add_flag("-v,--verbose", bench_verbose, "List warnings");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_input;
  }

  try {
    if (train->parsed()) return cmd_train(train_args, model_out, trace_out, out);
    if (predict->parsed()) return cmd_predict(predict_args, predict_model, labelled, predict_out, out);
    if (eval->parsed()) return cmd_eval(eval_args, eval_model, out);
    if (stats->parsed()) return cmd_kernel_stats(stats_args, kernel_name, out);
    if (bench->parsed()) return cmd_bench(bench_configs, bench_overrides, bench_out, bench_verbose, out, err);
  } catch (const numerical_error& e) {
    err << "error: " << e.what() << '\n';
    return exit_not_converged;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_input;
  }
  return exit_input;
}

}  // namespace riklr::cli
