#include "perfou/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "perfou/errors.hpp"
#include "perfou/quadrature.hpp"

namespace perfou {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// L(k/m) for k = 0..m-1; L is 1-periodic so this covers every grid point.
std::vector<double> drift_table(const FouModel& model, std::size_t m) {
    std::vector<double> table(m);
    for (std::size_t k = 0; k < m; ++k) {
        table[k] = drift_L(model, static_cast<double>(k) / static_cast<double>(m));
    }
    return table;
}

}  // namespace

double BasisFunction::operator()(double t) const {
    switch (kind) {
        case BasisKind::constant:
            return 1.0;
        case BasisKind::sine:
            return std::numbers::sqrt2 * std::sin(kTwoPi * frequency * t);
        case BasisKind::cosine:
            return std::numbers::sqrt2 * std::cos(kTwoPi * frequency * t);
    }
    return 0.0;
}

double BasisFunction::bound() const {
    return kind == BasisKind::constant ? 1.0 : std::numbers::sqrt2;
}

std::string BasisFunction::name() const {
    switch (kind) {
        case BasisKind::constant:
            return "const";
        case BasisKind::sine:
            return "sin" + std::to_string(frequency);
        case BasisKind::cosine:
            return "cos" + std::to_string(frequency);
    }
    return "?";
}

BasisFunction constant_basis() { return {BasisKind::constant, 0}; }
BasisFunction sine_basis(int k) { return {BasisKind::sine, k}; }
BasisFunction cosine_basis(int k) { return {BasisKind::cosine, k}; }

BasisSet::BasisSet(std::vector<BasisFunction> functions) : functions_(std::move(functions)) {
    for (std::size_t i = 0; i < functions_.size(); ++i) {
        const auto& f = functions_[i];
        if (f.kind == BasisKind::constant && f.frequency != 0) {
            throw std::invalid_argument("constant basis function takes no frequency");
        }
        if (f.kind != BasisKind::constant && f.frequency < 1) {
            throw std::invalid_argument("trigonometric basis frequency must be >= 1");
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (functions_[j] == f) {
                throw std::invalid_argument("duplicate basis function " + f.name() +
                                            " breaks orthonormality");
            }
        }
    }
}

double BasisSet::bound() const {
    double b = 0.0;
    for (const auto& f : functions_) b = std::max(b, f.bound());
    return b;
}

Eigen::VectorXd BasisSet::evaluate(double t) const {
    Eigen::VectorXd v(static_cast<Eigen::Index>(size()));
    for (std::size_t i = 0; i < size(); ++i) v[static_cast<Eigen::Index>(i)] = functions_[i](t);
    return v;
}

Eigen::MatrixXd basis_gram(const BasisSet& basis) {
    const auto p = static_cast<Eigen::Index>(basis.size());
    Eigen::MatrixXd gram(p, p);
    // Products have frequency up to 2k; panels keep the rule exact for moderate k.
    int max_k = 1;
    for (const auto& f : basis.functions()) max_k = std::max(max_k, f.frequency);
    const auto panels = static_cast<std::size_t>(max_k);
    for (Eigen::Index i = 0; i < p; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            const auto& fi = basis[static_cast<std::size_t>(i)];
            const auto& fj = basis[static_cast<std::size_t>(j)];
            gram(i, j) = gram(j, i) = integrate_composite(
                legendre64(), 0.0, 1.0, panels, [&](double t) { return fi(t) * fj(t); });
        }
    }
    return gram;
}

void FouModel::validate() const {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("alpha must be > 0");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("sigma must be >= 0");
    if (mu.empty()) throw std::invalid_argument("model needs at least one basis function");
    if (mu.size() != basis.size()) {
        throw std::invalid_argument("mu has " + std::to_string(mu.size()) + " entries but basis has " +
                                    std::to_string(basis.size()));
    }
}

Eigen::VectorXd FouModel::theta() const {
    Eigen::VectorXd th(static_cast<Eigen::Index>(p() + 1));
    for (std::size_t i = 0; i < p(); ++i) th[static_cast<Eigen::Index>(i)] = mu[i];
    th[static_cast<Eigen::Index>(p())] = alpha;
    return th;
}

std::vector<double> SamplePath::grid() const {
    std::vector<double> g(x.size());
    for (std::size_t k = 0; k < g.size(); ++k) g[k] = time(k);
    return g;
}

double drift_L(const FouModel& model, double t) {
    double acc = 0.0;
    for (std::size_t i = 0; i < model.mu.size(); ++i) acc += model.mu[i] * model.basis[i](t);
    return acc;
}

std::size_t default_burn_in_periods(double alpha) {
    return static_cast<std::size_t>(std::ceil(std::log(1e8) / alpha));
}

std::size_t steps_per_period_from_step(double step) {
    if (!(step > 0.0) || step > 1.0) throw InvalidStep("step must lie in (0,1]");
    const double inv = 1.0 / step;
    const double m = std::round(inv);
    if (std::abs(inv - m) > 1e-9 * m) {
        throw InvalidStep("1/step must be an integer so the grid aligns with whole periods");
    }
    return static_cast<std::size_t>(m);
}

SamplePath simulate_with_driver(const FouModel& model, std::size_t n_periods,
                                std::size_t steps_per_period, std::span<const double> increments,
                                double x0) {
    model.validate();
    if (steps_per_period < 1) throw InvalidStep("need at least one step per period");
    const std::size_t n_steps = n_periods * steps_per_period;
    if (increments.size() != n_steps) {
        throw LengthMismatch("driver has " + std::to_string(increments.size()) +
                             " increments, grid needs " + std::to_string(n_steps));
    }
    const double dt = 1.0 / static_cast<double>(steps_per_period);
    const std::vector<double> drift = drift_table(model, steps_per_period);

    SamplePath path{.model = model,
                    .n_periods = n_periods,
                    .steps_per_period = steps_per_period,
                    .x = std::vector<double>(n_steps + 1),
                    .driver_increments = std::vector<double>(increments.begin(), increments.end()),
                    .burn_in_steps = 0};
    double x = x0;
    path.x[0] = x;
    for (std::size_t k = 0; k < n_steps; ++k) {
        x += (drift[k % steps_per_period] - model.alpha * x) * dt + model.sigma * increments[k];
        path.x[k + 1] = x;
    }
    return path;
}

SamplePath simulate_path(const FouModel& model, const SimulationOptions& options) {
    model.validate();
    const std::size_t m = options.steps_per_period;
    if (m < 1) throw InvalidStep("need at least one step per period");
    if (model.alpha / static_cast<double>(m) >= 1.0) {
        throw InvalidStep("alpha * step must be < 1 for a contracting Euler recursion");
    }
    if (options.n_periods < 1) throw std::invalid_argument("n_periods must be >= 1");

    const std::size_t n_steps = options.n_periods * m;
    const std::size_t burn_steps =
        options.stationary_start
            ? m * options.burn_in_periods.value_or(default_burn_in_periods(model.alpha))
            : 0;

    const FgnSpec spec{.hurst = model.hurst,
                       .step = 1.0 / static_cast<double>(m),
                       .count = n_steps,
                       .seed = options.seed};
    std::vector<double> noise = burn_steps > 0 ? generate_two_sided_increments(spec, burn_steps)
                                               : generate_fgn(spec);

    double x0 = model.xi0;
    if (burn_steps > 0) {
        const double dt = spec.step;
        const std::vector<double> drift = drift_table(model, m);
        // burn_steps is a multiple of m, so the phase of step k is k mod m.
        for (std::size_t k = 0; k < burn_steps; ++k) {
            x0 += (drift[k % m] - model.alpha * x0) * dt + model.sigma * noise[k];
        }
    }

    std::span<const double> forward(noise.data() + burn_steps, n_steps);
    SamplePath path = simulate_with_driver(model, options.n_periods, m, forward, x0);
    path.burn_in_steps = burn_steps;
    return path;
}

SamplePath simulate_path(const FouModel& model, std::size_t n_periods, double step,
                         std::uint64_t seed, bool stationary_start) {
    return simulate_path(model, SimulationOptions{.n_periods = n_periods,
                                                  .steps_per_period = steps_per_period_from_step(step),
                                                  .seed = seed,
                                                  .stationary_start = stationary_start,
                                                  .burn_in_periods = std::nullopt});
}

double tilde_h(const FouModel& model, double t) {
    // int_{-inf}^t e^{-alpha(t-s)} L(s) ds summed over whole periods is a geometric series.
    const double a = model.alpha;
    const double one_period =
        integrate(legendre64(), 0.0, 1.0, [&](double u) { return std::exp(-a * u) * drift_L(model, t - u); });
    return -one_period / std::expm1(-a);
}

double h_transient(const FouModel& model, double t) {
    if (t < 0.0) throw std::invalid_argument("h_transient defined for t >= 0");
    if (t == 0.0) return 0.0;
    const double a = model.alpha;
    const auto panels = static_cast<std::size_t>(std::max(1.0, std::ceil(t)));
    return integrate_composite(legendre64(), 0.0, t, panels,
                               [&](double s) { return std::exp(-a * (t - s)) * drift_L(model, s); });
}

std::vector<double> coupling_gap(const FouModel& model, const SamplePath& from_xi0,
                                 const SamplePath& stationary) {
    (void)model;
    if (from_xi0.x.size() != stationary.x.size() ||
        from_xi0.steps_per_period != stationary.steps_per_period) {
        throw GridMismatch("coupled paths must share the time grid");
    }
    if (from_xi0.driver_increments && stationary.driver_increments &&
        *from_xi0.driver_increments != *stationary.driver_increments) {
        throw GridMismatch("coupled paths must share driver increments");
    }
    std::vector<double> gap(from_xi0.x.size());
    for (std::size_t k = 0; k < gap.size(); ++k) gap[k] = std::abs(from_xi0.x[k] - stationary.x[k]);
    return gap;
}

void write_path_csv(const SamplePath& path, std::ostream& out) {
    const bool with_driver = path.driver_increments.has_value();
    out << (with_driver ? "t,x,db\n" : "t,x\n");
    char buf[96];
    for (std::size_t k = 0; k < path.x.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g", path.time(k), path.x[k]);
        out << buf;
        if (with_driver) {
            out << ',';
            if (k < path.driver_increments->size()) {
                std::snprintf(buf, sizeof buf, "%.17g", (*path.driver_increments)[k]);
                out << buf;
            }
        }
        out << '\n';
    }
}

namespace {

double parse_double(const std::string& field, std::size_t line) {
    try {
        std::size_t used = 0;
        const double v = std::stod(field, &used);
        if (used != field.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw IoError("bad number '" + field + "' on line " + std::to_string(line));
    }
}

}  // namespace

PathTable read_path_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty path file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    bool with_driver = false;
    if (line == "t,x,db") {
        with_driver = true;
    } else if (line != "t,x") {
        throw IoError("path file header must be 't,x' or 't,x,db', got '" + line + "'");
    }

    PathTable table;
    std::vector<double> db;
    std::size_t lineno = 1;
    bool saw_empty_db = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (line.back() == ',') fields.emplace_back();
        const std::size_t expected = with_driver ? 3 : 2;
        if (fields.size() != expected) {
            throw IoError("line " + std::to_string(lineno) + " has " + std::to_string(fields.size()) +
                          " fields, expected " + std::to_string(expected));
        }
        if (saw_empty_db) throw IoError("rows after the final (driverless) row");
        table.t.push_back(parse_double(fields[0], lineno));
        table.x.push_back(parse_double(fields[1], lineno));
        if (with_driver) {
            if (fields[2].empty()) {
                saw_empty_db = true;
            } else {
                db.push_back(parse_double(fields[2], lineno));
            }
        }
    }
    if (table.x.size() < 2) throw IoError("path file needs at least two rows");
    if (with_driver) {
        if (db.size() + 1 != table.x.size()) {
            throw IoError("driver column must have one entry fewer than the path");
        }
        table.db = std::move(db);
    }
    return table;
}

SamplePath path_from_table(const PathTable& table, const FouModel& model,
                           std::size_t burn_in_steps) {
    const std::size_t rows = table.x.size();
    if (rows < 2 || table.t.size() != rows) throw LengthMismatch("path table is malformed");
    const std::size_t m = steps_per_period_from_step(table.t[1] - table.t[0]);
    for (std::size_t k = 0; k < rows; ++k) {
        const double expected = static_cast<double>(k) / static_cast<double>(m);
        if (std::abs(table.t[k] - expected) > 1e-9) {
            throw GridMismatch("time column is not the uniform grid k/" + std::to_string(m));
        }
    }
    if ((rows - 1) % m != 0) throw PartialPeriod("path does not span whole periods");

    SamplePath path{.model = model,
                    .n_periods = (rows - 1) / m,
                    .steps_per_period = m,
                    .x = table.x,
                    .driver_increments = table.db,
                    .burn_in_steps = burn_in_steps};
    return path;
}

}  // namespace perfou
