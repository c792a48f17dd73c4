#pragma once

#include "riklr/kernel.hpp"
#include "riklr/solver.hpp"

#include <json.hpp>

namespace riklr {

/// {"kind": "tl1", "eta": ...} or {"kind": "rbf", "sigma": ...}
nlohmann::ordered_json kernel_to_json(const KernelSpec& spec);
KernelSpec kernel_from_json(const nlohmann::json& j);

nlohmann::ordered_json solver_to_json(const SolverConfig& cfg);
/// Missing keys keep their defaults from `base`.
SolverConfig solver_from_json(const nlohmann::json& j, SolverConfig base = {});

nlohmann::ordered_json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const nlohmann::json& j);
nlohmann::ordered_json vector_to_json(const Eigen::VectorXd& v);
Eigen::VectorXd vector_from_json(const nlohmann::json& j);

}  // namespace riklr
