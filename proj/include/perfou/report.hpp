#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

#include "perfou/asymptotics.hpp"
#include "perfou/estimator.hpp"
#include "perfou/experiments.hpp"
#include "perfou/model.hpp"

namespace perfou {

std::string mode_name(EstimatorMode mode);
std::string trace_name(TraceRule rule);

nlohmann::json to_json(const Eigen::VectorXd& v);
nlohmann::json to_json(const Eigen::MatrixXd& m);

// theta_hat, mode, gamma_n, Lambda_n, degenerate flag and the grid it came from.
nlohmann::json estimate_report(const SamplePath& path, const EstimateResult& result);
// Same layout for a path whose design degenerated; theta_hat and gamma_n are null.
nlohmann::json degenerate_estimate_report(const SamplePath& path, const DesignMatrices& design,
                                          EstimatorMode mode);

nlohmann::json limits_report(const FouModel& model, const LimitMatrices& limits);

// Aggregates and reference matrices. Wall-clock is left out so equal inputs give equal bytes.
nlohmann::json experiment_report(const ExperimentReport& report);

nlohmann::json coupling_report(const CouplingReport& report);

// Pretty-printed with a trailing newline.
void write_json(const nlohmann::json& doc, const std::filesystem::path& path);

}  // namespace perfou
