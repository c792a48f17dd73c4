#include "riklr/json_io.hpp"

#include "riklr/error.hpp"

namespace riklr {

nlohmann::ordered_json kernel_to_json(const KernelSpec& spec) {
  nlohmann::ordered_json j;
  if (const auto* t = std::get_if<Tl1Kernel>(&spec)) {
    j["kind"] = "tl1";
    j["eta"] = t->eta;
  } else {
    j["kind"] = "rbf";
    j["sigma"] = std::get<RbfKernel>(spec).sigma;
  }
  return j;
}

KernelSpec kernel_from_json(const nlohmann::json& j) {
  try {
    const auto kind = j.at("kind").get<std::string>();
    KernelSpec spec;
    if (kind == "tl1") {
      spec = Tl1Kernel{j.at("eta").get<double>()};
    } else if (kind == "rbf") {
      spec = RbfKernel{j.at("sigma").get<double>()};
    } else {
      throw config_error("kernel: unknown kind '" + kind + "'");
    }
    validate(spec);
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("kernel: ") + e.what());
  }
}

nlohmann::ordered_json solver_to_json(const SolverConfig& cfg) {
  nlohmann::ordered_json j;
  j["gamma"] = cfg.gamma;
  if (!cfg.gamma_schedule.empty()) j["gamma_schedule"] = cfg.gamma_schedule;
  j["epsilon_outer"] = cfg.epsilon_outer;
  j["max_outer"] = cfg.max_outer;
  j["epsilon_inner"] = cfg.epsilon_inner;
  j["max_inner"] = cfg.max_inner;
  return j;
}

SolverConfig solver_from_json(const nlohmann::json& j, SolverConfig base) {
  try {
    if (j.contains("gamma")) base.gamma = j.at("gamma").get<double>();
    if (j.contains("gamma_schedule")) {
      base.gamma_schedule = j.at("gamma_schedule").get<std::vector<double>>();
    }
    if (j.contains("epsilon_outer")) base.epsilon_outer = j.at("epsilon_outer").get<double>();
    if (j.contains("max_outer")) base.max_outer = j.at("max_outer").get<int>();
    if (j.contains("epsilon_inner")) base.epsilon_inner = j.at("epsilon_inner").get<double>();
    if (j.contains("max_inner")) base.max_inner = j.at("max_inner").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("solver: ") + e.what());
  }
  base.validate();
  return base;
}

nlohmann::ordered_json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw config_error("expected an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(j[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw config_error("ragged matrix at row " + std::to_string(i));
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

nlohmann::ordered_json vector_to_json(const Eigen::VectorXd& v) {
  return nlohmann::ordered_json(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace riklr
