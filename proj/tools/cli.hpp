#pragma once

#include "riklr/experiment.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace riklr::cli {

enum ExitCode : int { exit_ok = 0, exit_input = 1, exit_not_converged = 2 };

/// Every configurable key with its default value. Sections: data, model,
/// solver, experiment, output.
nlohmann::ordered_json default_config();

/// Overlays a JSON document on the defaults. Unknown keys and values of the
/// wrong type throw config_error.
void merge_config(nlohmann::ordered_json& config, const nlohmann::json& overlay);

/// Applies one "section.key=value" override. The value is read as JSON when
/// it parses, otherwise as a plain string, then type-checked.
void apply_override(nlohmann::ordered_json& config, const std::string& assignment);

/// Defaults, then the file (if any; relative data paths resolve against its
/// directory), then the overrides in order.
nlohmann::ordered_json build_config(const std::string& path, const std::vector<std::string>& overrides);

CsvOptions csv_options(const nlohmann::json& config);
ModelSpec model_spec(const nlohmann::json& config, Eigen::Index dim);
ExperimentSpec experiment_spec(const nlohmann::json& config);

/// Entry point shared by the executable and the tests. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace riklr::cli
