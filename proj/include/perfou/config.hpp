#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "perfou/estimator.hpp"
#include "perfou/experiments.hpp"
#include "perfou/model.hpp"

namespace perfou {

struct EstimateSection {
    EstimatorMode mode = EstimatorMode::oracle_divergence;
    std::string path;  // empty: simulate from the model section
    CorrectionAlpha correction = CorrectionAlpha::true_alpha;
    TraceRule trace = TraceRule::discrete_exact;
    bool cross_check = false;
};

struct McSection {
    std::vector<std::size_t> n_list;
    std::size_t replicates = 2;
    std::uint64_t master_seed = 0;
    EstimatorMode mode = EstimatorMode::oracle_divergence;
    CorrectionAlpha correction = CorrectionAlpha::true_alpha;
    TraceRule trace = TraceRule::discrete_exact;
    CltThresholds thresholds;
};

// One config shared by every subcommand; unknown keys are rejected.
struct AppConfig {
    FouModel model;
    std::size_t step_denominator = 256;
    std::size_t n_periods = 1;
    std::uint64_t seed = 0;
    bool stationary_start = false;
    std::optional<std::size_t> burn_in_periods;
    std::size_t workers = 1;
    EstimateSection estimate;
    McSection mc;

    SimulationOptions simulation_options() const;
    McConfig mc_config() const;
    CouplingConfig coupling_config() const;
    // Pre-zero steps a stationary simulation of this config uses; 0 otherwise.
    std::size_t burn_in_steps() const;
};

// Throws ConfigError on unknown keys, wrong types or inadmissible values.
AppConfig config_from_json(const nlohmann::json& doc);

// "a.b.c=value"; value is parsed as JSON and falls back to a plain string.
void apply_override(nlohmann::json& doc, const std::string& assignment);

nlohmann::json read_json_file(const std::filesystem::path& path);

AppConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

}  // namespace perfou
