#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include <Eigen/Dense>

#include "perfou/fgn.hpp"
#include "perfou/model.hpp"

namespace perfou {

enum class EstimatorMode {
    naive_pathwise,     // P from forward Stieltjes sums of the observed path only
    oracle_divergence,  // sum X dX corrected to the divergence integral (needs the driver)
};

// Which trace term converts sum X_k dB_k to a divergence-type (zero-mean) sum.
enum class TraceRule {
    discrete_exact,  // exact E[sum X_k dB_k]/sigma of the simulated Euler system
    continuous,      // H(2H-1) int_0^T int_0^t e^{-alpha(t-s)} (t-s)^{2H-2} ds dt
};

inline constexpr double kDegeneracyThreshold = 1e-12;

// Q_n = [[G, -a], [-a^T, b]] and the quantities of its closed-form inverse.
struct DesignMatrices {
    Eigen::MatrixXd G;          // p x p, int_0^n phi_i phi_j dt
    Eigen::VectorXd a;          // int_0^n phi_i X dt
    double b = 0.0;             // int_0^n X^2 dt
    Eigen::VectorXd lambda_n;   // a / n
    double residual_variance = 0.0;  // b/n - |lambda_n|^2
    std::optional<double> gamma_n;   // 1 / residual_variance; empty when degenerate
    std::size_t n = 0;

    bool degenerate() const noexcept { return !gamma_n.has_value(); }
    Eigen::MatrixXd Q() const;
};

// Design with G = n I_p from Lambda_n and b; used for synthetic checks.
DesignMatrices make_design(std::size_t n, const Eigen::VectorXd& lambda_n, double b);

struct EstimateOptions {
    EstimatorMode mode = EstimatorMode::naive_pathwise;
    std::optional<double> sigma;                 // defaults to the path's model sigma
    std::optional<double> alpha_for_correction;  // empty: plug in the naive alpha_hat
    TraceRule trace = TraceRule::discrete_exact;
    bool cross_check = false;  // also solve Q theta = P densely and record the discrepancy
};

struct EstimateResult {
    Eigen::VectorXd theta_hat;   // (mu_hat_1..mu_hat_p, alpha_hat)
    Eigen::VectorXd P;
    DesignMatrices design;
    Eigen::MatrixXd Q_inverse;
    EstimatorMode mode = EstimatorMode::naive_pathwise;
    TraceRule trace = TraceRule::discrete_exact;
    // (int phi_i dB, -int X dB) in the active convention; present when the driver is.
    std::optional<Eigen::VectorXd> R_n;
    double trace_correction = 0.0;                 // sigma-free, 0 in naive mode
    std::optional<double> alpha_used_for_correction;
    std::optional<double> dense_solve_discrepancy;  // max |theta_closed - theta_dense|, relative
};

// sum_k f_k (X_{k+1} - X_k); f may carry one extra (unused) trailing value.
double forward_stieltjes(std::span<const double> f_values, std::span<const double> dX);

// Left-endpoint Riemann sums over the simulation grid.
DesignMatrices build_design(const SamplePath& path);

// (1/n) [[I + g L L^T, g L], [g L^T, g]], the inverse of [[n I, -a], [-a^T, b]]; throws DegenerateDesign.
Eigen::MatrixXd invert_Q_closed_form(const DesignMatrices& design);

// H(2H-1) int_0^T int_0^t e^{-alpha u} u^{2H-2} du dt, inner integral via the lower
// incomplete gamma function, outer by quadrature. Multiply by sigma^2 to correct sum X dX.
double malliavin_trace_correction(double alpha, HurstExponent hurst, double horizon);

// E[sum_{k<n_steps} X_k dB_k] / sigma for the Euler recursion with step 1/m whose noise
// started burn_in_steps steps before t = 0.
double discrete_trace_correction(double alpha, HurstExponent hurst, std::size_t steps_per_period,
                                 std::size_t n_steps, std::size_t burn_in_steps);

EstimateResult estimate(const SamplePath& path, const EstimateOptions& options = {});

}  // namespace perfou
