#pragma once

#include <cstddef>
#include <vector>

namespace perfou {

// Nodes and weights on [0,1].
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const noexcept { return nodes.size(); }
};

// Gauss rule for the weight u^exponent on [0,1], exponent > -1 (Golub-Welsch on the
// shifted Jacobi recurrence). exponent = 0 gives Gauss-Legendre.
QuadratureRule gauss_jacobi_unit(std::size_t n, double exponent);

QuadratureRule gauss_legendre_unit(std::size_t n);

// Shared 64-node Gauss-Legendre rule on [0,1].
const QuadratureRule& legendre64();

// Integral of f over [a,b] with `rule` mapped affinely.
template <class F>
double integrate(const QuadratureRule& rule, double a, double b, F&& f) {
    const double h = b - a;
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) acc += rule.weights[i] * f(a + h * rule.nodes[i]);
    return h * acc;
}

// Composite rule: [a,b] split into `panels` equal panels.
template <class F>
double integrate_composite(const QuadratureRule& rule, double a, double b, std::size_t panels,
                           F&& f) {
    const double h = (b - a) / static_cast<double>(panels);
    double acc = 0.0;
    for (std::size_t p = 0; p < panels; ++p) {
        const double lo = a + h * static_cast<double>(p);
        acc += integrate(rule, lo, lo + h, f);
    }
    return acc;
}

}  // namespace perfou
