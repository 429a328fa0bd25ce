#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "perfou/fgn.hpp"

namespace perfou {

enum class BasisKind { constant, sine, cosine };

// One of 1, sqrt(2) sin(2 pi k t), sqrt(2) cos(2 pi k t). All are 1-periodic and the
// family is orthonormal in L^2[0,1].
struct BasisFunction {
    BasisKind kind = BasisKind::constant;
    int frequency = 0;

    double operator()(double t) const;
    double bound() const;
    std::string name() const;

    friend bool operator==(const BasisFunction&, const BasisFunction&) = default;
};

BasisFunction constant_basis();
BasisFunction sine_basis(int k);
BasisFunction cosine_basis(int k);

class BasisSet {
public:
    explicit BasisSet(std::vector<BasisFunction> functions);

    std::size_t size() const noexcept { return functions_.size(); }
    const BasisFunction& operator[](std::size_t i) const { return functions_[i]; }
    const std::vector<BasisFunction>& functions() const noexcept { return functions_; }

    // Uniform bound C on |phi_i|.
    double bound() const;

    Eigen::VectorXd evaluate(double t) const;

private:
    std::vector<BasisFunction> functions_;
};

// Gram matrix int_0^1 phi_i phi_j dt by Gauss-Legendre quadrature.
Eigen::MatrixXd basis_gram(const BasisSet& basis);

struct FouModel {
    HurstExponent hurst{0.7};
    double alpha = 1.0;             // mean reversion, > 0
    std::vector<double> mu;         // one amplitude per basis function
    double sigma = 1.0;             // noise scale, >= 0 (0 gives the deterministic ODE)
    BasisSet basis{{}};
    double xi0 = 0.0;

    void validate() const;
    std::size_t p() const noexcept { return mu.size(); }

    // (mu_1, ..., mu_p, alpha)
    Eigen::VectorXd theta() const;
};

struct SimulationOptions {
    std::size_t n_periods = 1;
    std::size_t steps_per_period = 256;      // m, step = 1/m
    std::uint64_t seed = 0;
    bool stationary_start = false;
    std::optional<std::size_t> burn_in_periods;  // default: ceil(ln(1e8)/alpha)
};

// Euler path on t_k = k/m, k = 0..n*m.
struct SamplePath {
    FouModel model;
    std::size_t n_periods = 0;
    std::size_t steps_per_period = 0;
    std::vector<double> x;
    // sigma-free fBm increments driving step k -> k+1; size() == x.size() - 1.
    std::optional<std::vector<double>> driver_increments;
    // Number of pre-zero increments that drove x[0] (jointly drawn with the driver).
    std::size_t burn_in_steps = 0;

    double step() const noexcept { return 1.0 / static_cast<double>(steps_per_period); }
    std::size_t n_steps() const noexcept { return n_periods * steps_per_period; }
    double time(std::size_t k) const noexcept {
        return static_cast<double>(k) / static_cast<double>(steps_per_period);
    }
    std::vector<double> grid() const;
};

double drift_L(const FouModel& model, double t);

// Periods of burn-in so that exp(-alpha * periods) < 1e-8.
std::size_t default_burn_in_periods(double alpha);

// Steps per period for step = 1/m; throws InvalidStep when 1/step is not integral.
std::size_t steps_per_period_from_step(double step);

SamplePath simulate_path(const FouModel& model, const SimulationOptions& options);

SamplePath simulate_path(const FouModel& model, std::size_t n_periods, double step,
                         std::uint64_t seed, bool stationary_start);

// Euler recursion from x0 at t = 0 with given sigma-free increments.
SamplePath simulate_with_driver(const FouModel& model, std::size_t n_periods,
                                std::size_t steps_per_period, std::span<const double> increments,
                                double x0);

// 1-periodic steady solution of h' = L - alpha h.
double tilde_h(const FouModel& model, double t);

// e^{-alpha t} int_0^t e^{alpha s} L(s) ds, by direct quadrature.
double h_transient(const FouModel& model, double t);

// |X_t - X~_t| per grid point for two paths on the same grid and driver.
std::vector<double> coupling_gap(const FouModel& model, const SamplePath& from_xi0,
                                 const SamplePath& stationary);

// CSV "t,x[,db]"; db is written when the driver is present (empty on the last row).
void write_path_csv(const SamplePath& path, std::ostream& out);

struct PathTable {
    std::vector<double> t;
    std::vector<double> x;
    std::optional<std::vector<double>> db;
};

PathTable read_path_csv(std::istream& in);

// Rebuild a SamplePath from a table; the grid must be uniform with step 1/m.
SamplePath path_from_table(const PathTable& table, const FouModel& model,
                           std::size_t burn_in_steps);

}  // namespace perfou
