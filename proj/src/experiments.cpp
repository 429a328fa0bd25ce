#include "perfou/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <istream>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>

#include <boost/math/distributions/normal.hpp>

#include "perfou/errors.hpp"
#include "perfou/rng.hpp"

namespace perfou {

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

std::string format17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct Moments {
    double mean = 0.0;
    double sd = 0.0;
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
    double ecdf_distance = 0.0;
};

Moments moments_of(std::vector<double> values) {
    Moments out;
    const auto r = static_cast<double>(values.size());
    if (values.size() < 2) return out;
    double sum = 0.0;
    for (double v : values) sum += v;
    out.mean = sum / r;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : values) {
        const double d = v - out.mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    out.sd = std::sqrt(m2 / (r - 1.0));
    m2 /= r;
    m3 /= r;
    m4 /= r;
    if (m2 > 0.0) {
        out.skewness = m3 / std::pow(m2, 1.5);
        out.excess_kurtosis = m4 / (m2 * m2) - 3.0;
    }

    if (out.sd > 0.0) {
        std::sort(values.begin(), values.end());
        double dist = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double phi = normal_cdf((values[i] - out.mean) / out.sd);
            const double lo = static_cast<double>(i) / r;
            const double hi = static_cast<double>(i + 1) / r;
            dist = std::max({dist, std::abs(phi - lo), std::abs(hi - phi)});
        }
        out.ecdf_distance = dist;
    }
    return out;
}

ReplicateRecord run_one(const McConfig& config, std::size_t n, std::size_t r) {
    ReplicateRecord rec;
    rec.n = n;
    rec.replicate = r;
    rec.seed = replicate_seed(config.master_seed, n, r);

    const SamplePath path = simulate_path(
        config.model, SimulationOptions{.n_periods = n,
                                        .steps_per_period = config.steps_per_period,
                                        .seed = rec.seed,
                                        .stationary_start = config.stationary_start,
                                        .burn_in_periods = config.burn_in_periods});
    EstimateOptions options;
    options.mode = config.mode;
    options.trace = config.trace;
    if (config.correction == CorrectionAlpha::true_alpha) options.alpha_for_correction = config.model.alpha;

    try {
        const EstimateResult est = estimate(path, options);
        rec.theta_hat = est.theta_hat;
        if (est.R_n) rec.scaled_noise = std::pow(static_cast<double>(n), -config.model.hurst.value()) * *est.R_n;
    } catch (const DegenerateDesign&) {
        rec.degenerate = true;
    }
    return rec;
}

}  // namespace

void McConfig::validate() const {
    model.validate();
    if (replicates < 2) throw std::invalid_argument("need at least 2 replicates");
    if (n_list.empty()) throw std::invalid_argument("n_list must not be empty");
    for (std::size_t i = 0; i < n_list.size(); ++i) {
        if (n_list[i] < 1) throw std::invalid_argument("n_list entries must be >= 1");
        if (i > 0 && n_list[i] <= n_list[i - 1]) {
            throw std::invalid_argument("n_list must be strictly increasing");
        }
    }
    if (workers < 1) throw std::invalid_argument("workers must be >= 1");
    if (steps_per_period < 1) throw InvalidStep("steps_per_period must be >= 1");
}

std::vector<std::string> component_names(const FouModel& model) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < model.p(); ++i) names.push_back("mu_" + std::to_string(i + 1));
    names.emplace_back("alpha");
    return names;
}

std::vector<ReplicateRecord> run_replicates(const McConfig& config) {
    config.validate();
    const std::size_t total = config.n_list.size() * config.replicates;
    std::vector<ReplicateRecord> records(total);

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&] {
        for (std::size_t unit = next++; unit < total; unit = next++) {
            try {
                const std::size_t n = config.n_list[unit / config.replicates];
                records[unit] = run_one(config, n, unit % config.replicates);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = total;
            }
        }
    };

    const std::size_t threads = std::min(config.workers, total);
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);
    return records;
}

std::vector<SizeAggregate> aggregate_records(const std::vector<ReplicateRecord>& records,
                                             const Eigen::VectorXd& theta, HurstExponent hurst) {
    std::vector<SizeAggregate> out;
    const auto dim = theta.size();
    std::size_t begin = 0;
    while (begin < records.size()) {
        std::size_t end = begin;
        while (end < records.size() && records[end].n == records[begin].n) ++end;

        SizeAggregate agg;
        agg.n = records[begin].n;
        std::vector<const ReplicateRecord*> ok;
        for (std::size_t i = begin; i < end; ++i) {
            if (records[i].degenerate) {
                ++agg.excluded;
            } else {
                ok.push_back(&records[i]);
            }
        }
        agg.included = ok.size();
        const auto r = static_cast<double>(ok.size());
        const double scale = std::pow(static_cast<double>(agg.n), 1.0 - hurst.value());

        agg.mean = Eigen::VectorXd::Zero(dim);
        agg.rmse = Eigen::VectorXd::Zero(dim);
        for (const auto* rec : ok) {
            agg.mean += rec->theta_hat;
            agg.rmse += (rec->theta_hat - theta).cwiseAbs2();
        }
        if (!ok.empty()) {
            agg.mean /= r;
            agg.rmse = (agg.rmse / r).cwiseSqrt();
        }
        agg.bias = agg.mean - theta;

        agg.scaled_error_cov = Eigen::MatrixXd::Zero(dim, dim);
        agg.bias_standard_error = Eigen::VectorXd::Zero(dim);
        agg.skewness = Eigen::VectorXd::Zero(dim);
        agg.excess_kurtosis = Eigen::VectorXd::Zero(dim);
        agg.ecdf_distance = Eigen::VectorXd::Zero(dim);
        if (ok.size() >= 2) {
            Eigen::MatrixXd errors(static_cast<Eigen::Index>(ok.size()), dim);
            for (std::size_t i = 0; i < ok.size(); ++i) {
                errors.row(static_cast<Eigen::Index>(i)) = (scale * (ok[i]->theta_hat - theta)).transpose();
            }
            const Eigen::RowVectorXd centre = errors.colwise().mean();
            const Eigen::MatrixXd centred = errors.rowwise() - centre;
            agg.scaled_error_cov = centred.transpose() * centred / (r - 1.0);

            for (Eigen::Index j = 0; j < dim; ++j) {
                std::vector<double> col(ok.size());
                for (std::size_t i = 0; i < ok.size(); ++i) col[i] = ok[i]->theta_hat[j];
                const Moments raw = moments_of(col);
                agg.bias_standard_error[j] = raw.sd / std::sqrt(r);

                for (std::size_t i = 0; i < ok.size(); ++i) col[i] = errors(static_cast<Eigen::Index>(i), j);
                const Moments m = moments_of(col);
                agg.skewness[j] = m.skewness;
                agg.excess_kurtosis[j] = m.excess_kurtosis;
                agg.ecdf_distance[j] = m.ecdf_distance;
            }

            const bool have_noise = std::all_of(ok.begin(), ok.end(),
                                                [](const auto* rec) { return rec->scaled_noise.size() > 0; });
            if (have_noise) {
                const auto q = ok.front()->scaled_noise.size();
                agg.scaled_noise_variance = Eigen::VectorXd::Zero(q);
                for (Eigen::Index j = 0; j < q; ++j) {
                    std::vector<double> col(ok.size());
                    for (std::size_t i = 0; i < ok.size(); ++i) col[i] = ok[i]->scaled_noise[j];
                    const double sd = moments_of(col).sd;
                    agg.scaled_noise_variance[j] = sd * sd;
                }
            }
        }
        out.push_back(std::move(agg));
        begin = end;
    }
    return out;
}

double relative_frobenius(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    const double denom = b.norm();
    if (denom == 0.0) return std::numeric_limits<double>::infinity();
    return (a - b).norm() / denom;
}

ExperimentReport run_consistency(const McConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    ExperimentReport report;
    report.kind = "consistency";
    report.components = component_names(config.model);
    report.theta = config.model.theta();
    report.records = run_replicates(config);
    report.aggregates = aggregate_records(report.records, report.theta, config.model.hurst);
    if (config.model.hurst.value() > 0.5 && config.model.sigma > 0.0) {
        report.reference = limit_matrices(config.model);
    }

    // RMSE nonincreasing in n up to one inversion, and halved from first to last n.
    bool pass = report.aggregates.size() >= 2;
    for (Eigen::Index j = 0; pass && j < report.theta.size(); ++j) {
        int inversions = 0;
        for (std::size_t i = 1; i < report.aggregates.size(); ++i) {
            if (report.aggregates[i].rmse[j] > report.aggregates[i - 1].rmse[j]) ++inversions;
        }
        pass = inversions <= 1 &&
               report.aggregates.back().rmse[j] <= 0.5 * report.aggregates.front().rmse[j];
    }
    report.pass = pass;
    report.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

ExperimentReport run_clt(const McConfig& config, const CltThresholds& thresholds) {
    if (config.n_list.size() != 1) throw std::invalid_argument("CLT study takes a single n");
    if (config.replicates < 300) throw std::invalid_argument("CLT study needs >= 300 replicates");
    if (config.mode != EstimatorMode::oracle_divergence) {
        throw std::invalid_argument("CLT study runs in oracle_divergence mode");
    }
    const auto start = std::chrono::steady_clock::now();
    ExperimentReport report;
    report.kind = "clt";
    report.components = component_names(config.model);
    report.theta = config.model.theta();
    report.records = run_replicates(config);
    report.aggregates = aggregate_records(report.records, report.theta, config.model.hurst);
    report.reference = limit_matrices(config.model);

    const SizeAggregate& agg = report.aggregates.front();
    const auto p = static_cast<Eigen::Index>(config.model.p());
    report.mu_block_distance = relative_frobenius(agg.scaled_error_cov.topLeftCorner(p, p),
                                                  report.reference.asym_cov.topLeftCorner(p, p));
    if (!report.reference.degenerate_limit) {
        report.full_distance = relative_frobenius(agg.scaled_error_cov, report.reference.asym_cov);
    }

    bool pass = *report.mu_block_distance <= thresholds.max_mu_block_distance;
    for (Eigen::Index j = 0; j < agg.skewness.size(); ++j) {
        pass = pass && std::abs(agg.skewness[j]) <= thresholds.max_abs_skewness &&
               std::abs(agg.excess_kurtosis[j]) <= thresholds.max_abs_excess_kurtosis;
    }
    report.pass = pass;
    report.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

CouplingReport run_coupling(const CouplingConfig& config) {
    const SamplePath stationary = simulate_path(
        config.model, SimulationOptions{.n_periods = config.n_periods,
                                        .steps_per_period = config.steps_per_period,
                                        .seed = config.seed,
                                        .stationary_start = true,
                                        .burn_in_periods = config.burn_in_periods});
    const SamplePath from_xi0 =
        simulate_with_driver(config.model, config.n_periods, config.steps_per_period,
                             *stationary.driver_increments, config.model.xi0);
    const std::vector<double> gap = coupling_gap(config.model, from_xi0, stationary);

    CouplingReport report;
    report.alpha = config.model.alpha;
    report.exact_match = std::all_of(gap.begin(), gap.end(), [](double g) { return g == 0.0; });
    for (std::size_t t = 0; t <= config.n_periods; ++t) {
        report.times.push_back(static_cast<double>(t));
        report.gaps.push_back(gap[t * config.steps_per_period]);
    }
    if (report.exact_match) return report;

    // Least-squares slope of log gap on t, above the rounding floor.
    double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
    std::size_t count = 0;
    for (std::size_t t = 1; t < report.times.size(); ++t) {
        if (report.gaps[t] <= 1e-12) continue;
        const double y = std::log(report.gaps[t]);
        st += report.times[t];
        sy += y;
        stt += report.times[t] * report.times[t];
        sty += report.times[t] * y;
        ++count;
    }
    report.points_fitted = count;
    if (count >= 2) {
        const double c = static_cast<double>(count);
        report.log_slope = (c * sty - st * sy) / (c * stt - st * st);
        report.pass = *report.log_slope <= -config.model.alpha * (1.0 - 0.1);
    }
    return report;
}

void write_replicates_csv(const ExperimentReport& report, std::ostream& out) {
    const auto p = report.theta.size() - 1;
    out << "n,replicate,seed";
    for (Eigen::Index i = 0; i < p; ++i) out << ",mu_hat_" << (i + 1);
    out << ",alpha_hat,degenerate\n";
    for (const auto& rec : report.records) {
        out << rec.n << ',' << rec.replicate << ',' << rec.seed;
        for (Eigen::Index i = 0; i <= p; ++i) {
            out << ',' << (rec.degenerate ? std::string("nan") : format17(rec.theta_hat[i]));
        }
        out << ',' << (rec.degenerate ? 1 : 0) << '\n';
    }
}

std::vector<ReplicateRecord> read_replicates_csv(std::istream& in, std::size_t p) {
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty replicate table");
    std::vector<ReplicateRecord> records;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != p + 5) throw IoError("replicate row has wrong field count: " + line);
        ReplicateRecord rec;
        rec.n = std::stoull(fields[0]);
        rec.replicate = std::stoull(fields[1]);
        rec.seed = std::stoull(fields[2]);
        rec.degenerate = fields.back() == "1";
        if (!rec.degenerate) {
            rec.theta_hat.resize(static_cast<Eigen::Index>(p + 1));
            for (std::size_t i = 0; i <= p; ++i) rec.theta_hat[static_cast<Eigen::Index>(i)] = std::stod(fields[3 + i]);
        }
        records.push_back(std::move(rec));
    }
    return records;
}

void write_qq_csv(const ExperimentReport& report, std::ostream& out) {
    out << "component,quantile,empirical,theoretical\n";
    if (report.aggregates.empty()) return;
    const std::size_t n = report.aggregates.back().n;

    std::vector<const ReplicateRecord*> ok;
    for (const auto& rec : report.records) {
        if (rec.n == n && !rec.degenerate) ok.push_back(&rec);
    }
    if (ok.size() < 2) return;
    const boost::math::normal standard;
    const auto r = static_cast<double>(ok.size());
    for (Eigen::Index j = 0; j < report.theta.size(); ++j) {
        // Standardizing removes the n^{1-H} scale, so raw errors suffice.
        std::vector<double> col(ok.size());
        for (std::size_t i = 0; i < ok.size(); ++i) col[i] = ok[i]->theta_hat[j] - report.theta[j];
        const Moments m = moments_of(col);
        std::sort(col.begin(), col.end());
        for (std::size_t i = 0; i < col.size(); ++i) {
            const double q = (static_cast<double>(i) + 0.5) / r;
            out << report.components[static_cast<std::size_t>(j)] << ',' << format17(q) << ','
                << format17(m.sd > 0.0 ? (col[i] - m.mean) / m.sd : 0.0) << ','
                << format17(boost::math::quantile(standard, q)) << '\n';
        }
    }
}

void write_coupling_csv(const CouplingReport& report, std::ostream& out) {
    out << "t,gap\n";
    for (std::size_t i = 0; i < report.times.size(); ++i) {
        out << format17(report.times[i]) << ',' << format17(report.gaps[i]) << '\n';
    }
}

}  // namespace perfou
