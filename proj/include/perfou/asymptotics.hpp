#pragma once

#include <cstddef>
#include <functional>
#include <span>

#include <Eigen/Dense>

#include "perfou/fgn.hpp"
#include "perfou/model.hpp"

namespace perfou {

using ScalarFunction = std::function<double(double)>;

// H(2H-1) int_0^1 int_0^1 f(s) g(t) |t-s|^{2H-2} ds dt for 1/2 < H < 1.
//
// With u = t - s the double integral becomes int_0^1 u^{2H-2} [c_fg(u) + c_gf(u)] du,
// c_fg(u) = int_0^{1-u} f(s) g(s+u) ds. The weight u^{2H-2} is absorbed exactly by a
// Gauss-Jacobi rule; c is smooth for smooth f, g and is integrated by Gauss-Legendre.
double singular_pair_integral(const ScalarFunction& f, const ScalarFunction& g,
                              HurstExponent hurst, std::size_t nodes = 64);

// Matrix of singular_pair_integral over a function family.
Eigen::MatrixXd singular_gram(std::span<const ScalarFunction> family, HurstExponent hurst);

// H(2H-1)
double alpha_h(HurstExponent hurst);

// sigma^2 alpha^{-2H} H Gamma(2H): variance of the zero-mean stationary fOU.
double stationary_variance(double alpha, double sigma, HurstExponent hurst);

// Lambda_i = int_0^1 phi_i h~ dt
Eigen::VectorXd lambda_limit(const FouModel& model);

// int_0^1 h~^2 dt
double tilde_h_square_mean(const FouModel& model);

// (int_0^1 h~^2 + stationary variance - |Lambda|^2)^{-1}
double gamma_limit(const FouModel& model);

Eigen::MatrixXd build_C(const FouModel& model);
Eigen::MatrixXd build_Sigma0(const FouModel& model);
Eigen::MatrixXd asymptotic_covariance(const FouModel& model);

struct LimitMatrices {
    Eigen::VectorXd Lambda;
    double gamma = 0.0;
    Eigen::MatrixXd C;
    Eigen::MatrixXd Sigma0;
    Eigen::MatrixXd asym_cov;  // sigma^2 C Sigma0 C
    double alpha_H = 0.0;
    double tilde_h_square_mean = 0.0;
    double stationary_variance = 0.0;
    double sigma0_minus_c_inverse = 0.0;  // Frobenius norm, diagnostic only
    bool clt_valid = false;               // 1/2 < H < 3/4
    bool degenerate_limit = false;        // b_bar <= 1e-12
};

LimitMatrices limit_matrices(const FouModel& model);

}  // namespace perfou
