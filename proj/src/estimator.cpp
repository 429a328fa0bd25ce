#include "perfou/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "perfou/errors.hpp"
#include "perfou/quadrature.hpp"

namespace perfou {

Eigen::MatrixXd DesignMatrices::Q() const {
    const auto p = G.rows();
    Eigen::MatrixXd q(p + 1, p + 1);
    q.topLeftCorner(p, p) = G;
    q.topRightCorner(p, 1) = -a;
    q.bottomLeftCorner(1, p) = -a.transpose();
    q(p, p) = b;
    return q;
}

namespace {

void finish_design(DesignMatrices& d) {
    const double nn = static_cast<double>(d.n);
    d.lambda_n = d.a / nn;
    d.residual_variance = d.b / nn - d.lambda_n.squaredNorm();
    if (d.residual_variance > kDegeneracyThreshold) {
        d.gamma_n = 1.0 / d.residual_variance;
    } else {
        d.gamma_n.reset();
    }
}

}  // namespace

DesignMatrices make_design(std::size_t n, const Eigen::VectorXd& lambda_n, double b) {
    DesignMatrices d;
    d.n = n;
    const auto p = lambda_n.size();
    d.G = static_cast<double>(n) * Eigen::MatrixXd::Identity(p, p);
    d.a = static_cast<double>(n) * lambda_n;
    d.b = b;
    finish_design(d);
    return d;
}

double forward_stieltjes(std::span<const double> f_values, std::span<const double> dX) {
    if (f_values.size() != dX.size() && f_values.size() != dX.size() + 1) {
        throw LengthMismatch("integrand has " + std::to_string(f_values.size()) +
                             " values for " + std::to_string(dX.size()) + " increments");
    }
    double acc = 0.0;
    for (std::size_t k = 0; k < dX.size(); ++k) acc += f_values[k] * dX[k];
    return acc;
}

DesignMatrices build_design(const SamplePath& path) {
    const std::size_t m = path.steps_per_period;
    if (m == 0 || path.x.size() != path.n_periods * m + 1 || path.n_periods == 0) {
        throw PartialPeriod("path must span a whole number of periods");
    }
    const auto& basis = path.model.basis;
    const auto p = static_cast<Eigen::Index>(basis.size());
    const double dt = path.step();
    const std::size_t n_steps = path.n_steps();

    // Basis values over one period; the grid repeats them exactly.
    Eigen::MatrixXd phi(p, static_cast<Eigen::Index>(m));
    for (std::size_t k = 0; k < m; ++k) phi.col(static_cast<Eigen::Index>(k)) = basis.evaluate(path.time(k));

    DesignMatrices d;
    d.n = path.n_periods;
    d.G = static_cast<double>(path.n_periods) * dt * (phi * phi.transpose());
    d.a = Eigen::VectorXd::Zero(p);
    double b = 0.0;
    for (std::size_t k = 0; k < n_steps; ++k) {
        const double x = path.x[k];
        d.a += phi.col(static_cast<Eigen::Index>(k % m)) * x;
        b += x * x;
    }
    d.a *= dt;
    d.b = b * dt;
    finish_design(d);
    return d;
}

Eigen::MatrixXd invert_Q_closed_form(const DesignMatrices& design) {
    if (design.degenerate()) {
        throw DegenerateDesign("b/n - |Lambda_n|^2 = " + std::to_string(design.residual_variance) +
                               " <= 1e-12; alpha is not identifiable from this path");
    }
    const auto p = design.lambda_n.size();
    const double nn = static_cast<double>(design.n);
    const double off = (design.G - nn * Eigen::MatrixXd::Identity(p, p)).cwiseAbs().maxCoeff();
    if (off > 1e-8 * nn) {
        throw std::invalid_argument("closed-form inverse needs G = n I (orthonormal basis), deviation " +
                                    std::to_string(off));
    }
    const double g = *design.gamma_n;
    const Eigen::VectorXd& lam = design.lambda_n;

    Eigen::MatrixXd inv(p + 1, p + 1);
    inv.topLeftCorner(p, p) = Eigen::MatrixXd::Identity(p, p) + g * lam * lam.transpose();
    inv.topRightCorner(p, 1) = g * lam;
    inv.bottomLeftCorner(1, p) = g * lam.transpose();
    inv(p, p) = g;
    return inv / nn;
}

double malliavin_trace_correction(double alpha, HurstExponent hurst, double horizon) {
    if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be > 0");
    const double h = hurst.value();
    if (!(h > 0.5)) throw std::invalid_argument("trace correction needs H > 1/2");
    if (!(horizon >= 0.0)) throw std::invalid_argument("horizon must be >= 0");
    if (horizon == 0.0) return 0.0;

    const double shape = 2.0 * h - 1.0;
    const double alpha_h = h * shape;
    // inner(t) = alpha^{1-2H} * lower_gamma(2H-1, alpha t)
    auto inner = [&](double t) { return boost::math::tgamma_lower(shape, alpha * t); };

    // inner ~ (alpha t)^{2H-1} near 0: Jacobi weight on the first panel.
    const double t1 = std::min(horizon, 1.0 / alpha);
    const QuadratureRule jacobi = gauss_jacobi_unit(48, shape);
    double outer = 0.0;
    for (std::size_t i = 0; i < jacobi.size(); ++i) {
        const double u = jacobi.nodes[i];
        const double t = t1 * u;
        // inner(t) / u^{2H-1}, smooth in u
        outer += jacobi.weights[i] * inner(t) / std::pow(u, shape);
    }
    outer *= t1;

    // Beyond alpha t = 50 the incomplete gamma equals Gamma(2H-1) to double precision.
    const double t_sat = 50.0 / alpha;
    const double t2 = std::min(horizon, t_sat);
    if (t2 > t1) {
        const auto panels = static_cast<std::size_t>(std::ceil((t2 - t1) * alpha));
        outer += integrate_composite(legendre64(), t1, t2, std::max<std::size_t>(1, panels), inner);
    }
    if (horizon > t_sat) outer += std::tgamma(shape) * (horizon - t_sat);

    return alpha_h * std::pow(alpha, 1.0 - 2.0 * h) * outer;
}

double discrete_trace_correction(double alpha, HurstExponent hurst, std::size_t steps_per_period,
                                 std::size_t n_steps, std::size_t burn_in_steps) {
    if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be > 0");
    if (steps_per_period < 1) throw InvalidStep("need at least one step per period");
    if (n_steps == 0) return 0.0;
    const double dt = 1.0 / static_cast<double>(steps_per_period);
    const double beta = 1.0 - alpha * dt;
    if (!(beta > 0.0 && beta < 1.0)) throw InvalidStep("alpha * step must lie in (0,1)");

    // S(j) = sum_{l=1}^{j} beta^{l-1} rho(l); constant once beta^{l-1} underflows 1e-18.
    const std::size_t j_max = n_steps - 1 + burn_in_steps;
    const auto j_sat = static_cast<std::size_t>(std::ceil(std::log(1e-18) / std::log(beta))) + 1;
    const std::size_t j_stop = std::min(j_max, j_sat);

    std::vector<double> partial(j_stop + 1, 0.0);
    double weight = 1.0;
    for (std::size_t l = 1; l <= j_stop; ++l) {
        partial[l] = partial[l - 1] + weight * fgn_autocovariance(hurst, l);
        weight *= beta;
    }

    double total = 0.0;
    for (std::size_t k = 0; k < n_steps; ++k) {
        const std::size_t j = k + burn_in_steps;
        if (j > j_stop) {
            total += partial[j_stop] * static_cast<double>(n_steps - k);
            break;
        }
        total += partial[j];
    }
    return std::pow(dt, hurst.twice()) * total;
}

EstimateResult estimate(const SamplePath& path, const EstimateOptions& options) {
    EstimateResult result;
    result.mode = options.mode;
    result.trace = options.trace;
    result.design = build_design(path);
    result.Q_inverse = invert_Q_closed_form(result.design);

    const std::size_t m = path.steps_per_period;
    const std::size_t n_steps = path.n_steps();
    const auto p = static_cast<Eigen::Index>(path.model.p());
    const auto& basis = path.model.basis;

    Eigen::MatrixXd phi(p, static_cast<Eigen::Index>(m));
    for (std::size_t k = 0; k < m; ++k) phi.col(static_cast<Eigen::Index>(k)) = basis.evaluate(path.time(k));

    std::vector<double> dx(n_steps);
    for (std::size_t k = 0; k < n_steps; ++k) dx[k] = path.x[k + 1] - path.x[k];

    result.P = Eigen::VectorXd::Zero(p + 1);
    for (std::size_t k = 0; k < n_steps; ++k) {
        result.P.head(p) += phi.col(static_cast<Eigen::Index>(k % m)) * dx[k];
    }
    const double x_dx = forward_stieltjes(path.x, dx);
    result.P[p] = -x_dx;

    double x_db = 0.0;
    Eigen::VectorXd phi_db = Eigen::VectorXd::Zero(p);
    if (path.driver_increments) {
        const auto& db = *path.driver_increments;
        if (db.size() != n_steps) throw LengthMismatch("driver length does not match the grid");
        for (std::size_t k = 0; k < n_steps; ++k) phi_db += phi.col(static_cast<Eigen::Index>(k % m)) * db[k];
        x_db = forward_stieltjes(path.x, db);
    }

    const double sigma = options.sigma.value_or(path.model.sigma);
    if (options.mode == EstimatorMode::oracle_divergence) {
        if (!path.driver_increments) {
            throw MissingDriver("oracle_divergence mode needs the driver increments");
        }
        double alpha_c = 0.0;
        if (options.alpha_for_correction) {
            alpha_c = *options.alpha_for_correction;
        } else {
            alpha_c = (result.Q_inverse * result.P)[p];
            if (!(alpha_c > 0.0)) {
                throw DegenerateDesign("plug-in alpha_hat " + std::to_string(alpha_c) +
                                       " is not positive; cannot evaluate the trace term");
            }
        }
        result.alpha_used_for_correction = alpha_c;
        result.trace_correction =
            options.trace == TraceRule::discrete_exact
                ? discrete_trace_correction(alpha_c, path.model.hurst, m, n_steps, path.burn_in_steps)
                : malliavin_trace_correction(alpha_c, path.model.hurst,
                                             static_cast<double>(path.n_periods));
        // Divergence-type sum X dX = pathwise sum - sigma^2 * trace.
        result.P[p] = -(x_dx - sigma * sigma * result.trace_correction);
    }

    if (path.driver_increments) {
        Eigen::VectorXd r(p + 1);
        r.head(p) = phi_db;
        r[p] = -(x_db - sigma * result.trace_correction);
        result.R_n = r;
    }

    result.theta_hat = result.Q_inverse * result.P;

    if (options.cross_check) {
        const Eigen::VectorXd dense = result.design.Q().fullPivLu().solve(result.P);
        const double scale = std::max(1.0, result.theta_hat.cwiseAbs().maxCoeff());
        result.dense_solve_discrepancy = (dense - result.theta_hat).cwiseAbs().maxCoeff() / scale;
    }
    return result;
}

}  // namespace perfou
