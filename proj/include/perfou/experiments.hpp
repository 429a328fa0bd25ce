#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "perfou/asymptotics.hpp"
#include "perfou/estimator.hpp"
#include "perfou/model.hpp"

namespace perfou {

enum class CorrectionAlpha { true_alpha, plugin };

struct McConfig {
    FouModel model;
    std::vector<std::size_t> n_list;
    std::size_t replicates = 2;
    std::size_t steps_per_period = 256;
    EstimatorMode mode = EstimatorMode::oracle_divergence;
    CorrectionAlpha correction = CorrectionAlpha::true_alpha;
    TraceRule trace = TraceRule::discrete_exact;
    std::uint64_t master_seed = 0;
    std::size_t workers = 1;
    bool stationary_start = true;
    std::optional<std::size_t> burn_in_periods;

    void validate() const;
};

struct CltThresholds {
    double max_mu_block_distance = 0.25;
    double max_abs_skewness = 0.3;
    double max_abs_excess_kurtosis = 0.5;
};

struct ReplicateRecord {
    std::size_t n = 0;
    std::size_t replicate = 0;
    std::uint64_t seed = 0;
    bool degenerate = false;
    Eigen::VectorXd theta_hat;     // empty when degenerate
    Eigen::VectorXd scaled_noise;  // n^{-H} R_n; empty when unavailable
};

// Aggregates of the included replicates at one sample size.
struct SizeAggregate {
    std::size_t n = 0;
    std::size_t included = 0;
    std::size_t excluded = 0;
    Eigen::VectorXd mean;
    Eigen::VectorXd bias;
    Eigen::VectorXd bias_standard_error;
    Eigen::VectorXd rmse;
    Eigen::MatrixXd scaled_error_cov;   // of n^{1-H}(theta_hat - theta)
    Eigen::VectorXd skewness;           // of the scaled errors
    Eigen::VectorXd excess_kurtosis;
    Eigen::VectorXd ecdf_distance;      // sup |F_emp - Phi| after standardization
    Eigen::VectorXd scaled_noise_variance;  // empty when no R_n was recorded
};

struct ExperimentReport {
    std::string kind;  // "consistency" or "clt"
    std::vector<std::string> components;
    Eigen::VectorXd theta;
    std::vector<ReplicateRecord> records;  // ordered by (n, replicate)
    std::vector<SizeAggregate> aggregates;
    LimitMatrices reference;
    std::optional<double> mu_block_distance;
    std::optional<double> full_distance;
    bool pass = false;
    double wall_clock_seconds = 0.0;
};

struct CouplingReport {
    double alpha = 0.0;
    std::vector<double> times;  // t = 0..T
    std::vector<double> gaps;
    std::optional<double> log_slope;  // empty when the gaps vanish (exact match)
    std::size_t points_fitted = 0;
    bool exact_match = false;
    bool pass = false;
};

struct CouplingConfig {
    FouModel model;
    std::size_t n_periods = 10;
    std::size_t steps_per_period = 256;
    std::uint64_t seed = 0;
    std::optional<std::size_t> burn_in_periods;
};

std::vector<std::string> component_names(const FouModel& model);

// Estimates for every (n, r) on `workers` threads, ordered by (n, r).
std::vector<ReplicateRecord> run_replicates(const McConfig& config);

// Pure function of the records; recomputing from a CSV round trip gives identical bits.
std::vector<SizeAggregate> aggregate_records(const std::vector<ReplicateRecord>& records,
                                             const Eigen::VectorXd& theta, HurstExponent hurst);

ExperimentReport run_consistency(const McConfig& config);

ExperimentReport run_clt(const McConfig& config, const CltThresholds& thresholds = {});

CouplingReport run_coupling(const CouplingConfig& config);

// ||A - B||_F / ||B||_F
double relative_frobenius(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

// "n,replicate,seed,mu_hat_1..mu_hat_p,alpha_hat,degenerate"
void write_replicates_csv(const ExperimentReport& report, std::ostream& out);
std::vector<ReplicateRecord> read_replicates_csv(std::istream& in, std::size_t p);

// "component,quantile,empirical,theoretical" for the scaled errors at the largest n.
void write_qq_csv(const ExperimentReport& report, std::ostream& out);

void write_coupling_csv(const CouplingReport& report, std::ostream& out);

}  // namespace perfou
