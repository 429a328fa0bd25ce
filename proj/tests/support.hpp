#pragma once

#include <vector>

#include "perfou/model.hpp"

namespace perfou::testing {

inline FouModel make_model(double hurst, double alpha, std::vector<double> mu, double sigma,
                           std::vector<BasisFunction> basis, double xi0 = 0.0) {
    FouModel m;
    m.hurst = HurstExponent(hurst);
    m.alpha = alpha;
    m.mu = std::move(mu);
    m.sigma = sigma;
    m.basis = BasisSet(std::move(basis));
    m.xi0 = xi0;
    return m;
}

// sin/cos pair with mu = (1, 2): the model used by the Monte Carlo studies.
inline FouModel study_model(double sigma = 0.5) {
    return make_model(0.65, 1.0, {1.0, 2.0}, sigma, {sine_basis(1), cosine_basis(1)});
}

}  // namespace perfou::testing
