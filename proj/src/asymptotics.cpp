#include "perfou/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "perfou/quadrature.hpp"

namespace perfou {

namespace {

void require_long_memory(HurstExponent hurst) {
    if (!(hurst.value() > 0.5)) {
        throw std::invalid_argument("limit objects need 1/2 < H < 1");
    }
}

std::size_t period_panels(const FouModel& model) {
    int k = 1;
    for (const auto& f : model.basis.functions()) k = std::max(k, f.frequency);
    return static_cast<std::size_t>(k);
}

Eigen::MatrixXd assemble_C(const Eigen::VectorXd& lambda, double gamma) {
    const auto p = lambda.size();
    Eigen::MatrixXd c(p + 1, p + 1);
    c.topLeftCorner(p, p) = Eigen::MatrixXd::Identity(p, p) + gamma * lambda * lambda.transpose();
    c.topRightCorner(p, 1) = gamma * lambda;
    c.bottomLeftCorner(1, p) = gamma * lambda.transpose();
    c(p, p) = gamma;
    return c;
}

}  // namespace

double alpha_h(HurstExponent hurst) { return hurst.value() * (2.0 * hurst.value() - 1.0); }

double singular_pair_integral(const ScalarFunction& f, const ScalarFunction& g,
                              HurstExponent hurst, std::size_t nodes) {
    require_long_memory(hurst);
    const QuadratureRule jacobi = gauss_jacobi_unit(nodes, 2.0 * hurst.value() - 2.0);
    const QuadratureRule inner = gauss_legendre_unit(nodes);

    double acc = 0.0;
    for (std::size_t i = 0; i < jacobi.size(); ++i) {
        const double u = jacobi.nodes[i];
        double c_fg = 0.0;
        double c_gf = 0.0;
        const double len = 1.0 - u;
        for (std::size_t j = 0; j < inner.size(); ++j) {
            const double s = len * inner.nodes[j];
            c_fg += inner.weights[j] * f(s) * g(s + u);
            c_gf += inner.weights[j] * g(s) * f(s + u);
        }
        acc += jacobi.weights[i] * len * (c_fg + c_gf);
    }
    return alpha_h(hurst) * acc;
}

Eigen::MatrixXd singular_gram(std::span<const ScalarFunction> family, HurstExponent hurst) {
    const auto k = static_cast<Eigen::Index>(family.size());
    Eigen::MatrixXd gram(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            gram(i, j) = gram(j, i) = singular_pair_integral(family[static_cast<std::size_t>(i)],
                                                             family[static_cast<std::size_t>(j)], hurst);
        }
    }
    return gram;
}

double stationary_variance(double alpha, double sigma, HurstExponent hurst) {
    if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be > 0");
    const double h = hurst.value();
    return sigma * sigma * std::pow(alpha, -2.0 * h) * h * std::tgamma(2.0 * h);
}

Eigen::VectorXd lambda_limit(const FouModel& model) {
    model.validate();
    const auto p = static_cast<Eigen::Index>(model.p());
    Eigen::VectorXd lambda(p);
    for (Eigen::Index i = 0; i < p; ++i) {
        const auto& phi = model.basis[static_cast<std::size_t>(i)];
        lambda[i] = integrate_composite(legendre64(), 0.0, 1.0, period_panels(model),
                                        [&](double t) { return phi(t) * tilde_h(model, t); });
    }
    return lambda;
}

double tilde_h_square_mean(const FouModel& model) {
    model.validate();
    return integrate_composite(legendre64(), 0.0, 1.0, period_panels(model), [&](double t) {
        const double h = tilde_h(model, t);
        return h * h;
    });
}

double gamma_limit(const FouModel& model) {
    const Eigen::VectorXd lambda = lambda_limit(model);
    return 1.0 / (tilde_h_square_mean(model) +
                  stationary_variance(model.alpha, model.sigma, model.hurst) - lambda.squaredNorm());
}

Eigen::MatrixXd build_C(const FouModel& model) {
    return assemble_C(lambda_limit(model), gamma_limit(model));
}

Eigen::MatrixXd build_Sigma0(const FouModel& model) {
    model.validate();
    require_long_memory(model.hurst);
    std::vector<ScalarFunction> family;
    for (const auto& phi : model.basis.functions()) family.emplace_back(phi);
    family.emplace_back([&model](double t) { return tilde_h(model, t); });

    // Gram of (phi_1..phi_p, h~); the sign flip on h~ gives the -a_bar blocks.
    Eigen::MatrixXd sigma0 = singular_gram(family, model.hurst);
    const auto p = static_cast<Eigen::Index>(model.p());
    sigma0.topRightCorner(p, 1) *= -1.0;
    sigma0.bottomLeftCorner(1, p) *= -1.0;
    return sigma0;
}

Eigen::MatrixXd asymptotic_covariance(const FouModel& model) {
    return limit_matrices(model).asym_cov;
}

LimitMatrices limit_matrices(const FouModel& model) {
    model.validate();
    require_long_memory(model.hurst);
    LimitMatrices lm;
    lm.Lambda = lambda_limit(model);
    lm.tilde_h_square_mean = tilde_h_square_mean(model);
    lm.stationary_variance = stationary_variance(model.alpha, model.sigma, model.hurst);
    lm.gamma = 1.0 / (lm.tilde_h_square_mean + lm.stationary_variance - lm.Lambda.squaredNorm());
    lm.C = assemble_C(lm.Lambda, lm.gamma);
    lm.Sigma0 = build_Sigma0(model);
    lm.asym_cov = model.sigma * model.sigma * lm.C * lm.Sigma0 * lm.C;
    lm.alpha_H = alpha_h(model.hurst);
    lm.sigma0_minus_c_inverse = (lm.Sigma0 - lm.C.inverse()).norm();
    lm.clt_valid = model.hurst.value() < 0.75;
    const auto p = static_cast<Eigen::Index>(model.p());
    lm.degenerate_limit = lm.Sigma0(p, p) <= 1e-12;
    return lm;
}

}  // namespace perfou
