#include "perfou/quadrature.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace perfou {

QuadratureRule gauss_jacobi_unit(std::size_t n, double exponent) {
    if (n < 1) throw std::invalid_argument("quadrature rule needs at least one node");
    if (!(exponent > -1.0)) throw std::invalid_argument("Jacobi exponent must exceed -1");

    // Jacobi weight (1-x)^a (1+x)^b on [-1,1] with a = 0, b = exponent.
    const double a = 0.0;
    const double b = exponent;
    const auto size = static_cast<Eigen::Index>(n);

    Eigen::VectorXd diag(size);
    Eigen::VectorXd sub(size > 1 ? size - 1 : 0);
    for (Eigen::Index k = 0; k < size; ++k) {
        const double kk = static_cast<double>(k);
        const double s = 2.0 * kk + a + b;
        diag[k] = (k == 0) ? (b - a) / (a + b + 2.0) : (b * b - a * a) / (s * (s + 2.0));
        if (k + 1 < size) {
            const double j = kk + 1.0;
            const double t = 2.0 * j + a + b;
            const double beta =
                4.0 * j * (j + a) * (j + b) * (j + a + b) / (t * t * (t + 1.0) * (t - 1.0));
            sub[k] = std::sqrt(beta);
        }
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
    eig.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    if (eig.info() != Eigen::Success) throw std::runtime_error("Golub-Welsch eigensolve failed");

    // Total mass of u^b on [0,1].
    const double mass = 1.0 / (b + 1.0);

    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (Eigen::Index i = 0; i < size; ++i) {
        const double v0 = eig.eigenvectors()(0, i);
        rule.nodes[static_cast<std::size_t>(i)] = 0.5 * (eig.eigenvalues()[i] + 1.0);
        rule.weights[static_cast<std::size_t>(i)] = mass * v0 * v0;
    }
    return rule;
}

QuadratureRule gauss_legendre_unit(std::size_t n) { return gauss_jacobi_unit(n, 0.0); }

const QuadratureRule& legendre64() {
    static const QuadratureRule rule = gauss_legendre_unit(64);
    return rule;
}

}  // namespace perfou
