#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "perfou/asymptotics.hpp"
#include "perfou/cli.hpp"
#include "perfou/errors.hpp"
#include "perfou/estimator.hpp"
#include "perfou/experiments.hpp"
#include "perfou/fgn.hpp"
#include "perfou/model.hpp"

using namespace perfou;
namespace fs = std::filesystem;

namespace {

// Tolerances and sizes, as fixed by the acceptance criteria.
constexpr double kCholeskyTol = 1e-10;
constexpr std::size_t kCholeskyCount = 64;
constexpr std::size_t kCirculantCount = 4096;
constexpr std::size_t kCirculantReplicates = 200;
constexpr double kAutocovSe = 4.0;
constexpr double kRuntime1 = 30.0;

constexpr double kAnchorTol = 1e-8;
constexpr double kBruteTol = 1e-4;
constexpr std::size_t kBruteCells = 2000;
constexpr double kRuntime2 = 10.0;

constexpr int kRandomDesigns = 100;
constexpr double kInverseTol = 1e-8;

constexpr double kNoiselessTol = 1e-2;
constexpr double kRuntime4 = 5.0;

constexpr double kRmseRatio = 0.5;
constexpr double kBiasSe = 3.0;
constexpr double kRuntime5 = 600.0;

constexpr double kMuBlockDistance = 0.25;
constexpr double kMaxSkew = 0.3;
constexpr double kMaxExcessKurtosis = 0.5;
constexpr double kRuntime6 = 1200.0;

constexpr std::size_t kL2Replicates = 500;
constexpr double kTrendSe = 2.0;

constexpr double kStationaryRelTol = 0.05;

constexpr double kSlopeRelTol = 0.10;

constexpr std::size_t kWorkers = 4;
constexpr std::uint64_t kMasterSeed = 20240611;

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(const char* format, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, format, v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

FouModel make_model(double hurst, double alpha, std::vector<double> mu, double sigma,
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

FouModel study_model() { return make_model(0.65, 1.0, {1.0, 2.0}, 0.5, {sine_basis(1), cosine_basis(1)}); }

FouModel noiseless_model() { return make_model(0.7, 0.8, {1.0, 0.5}, 0.0, {sine_basis(1), cosine_basis(1)}); }

McConfig study_config(std::vector<std::size_t> n_list, std::size_t replicates) {
    McConfig c;
    c.model = study_model();
    c.n_list = std::move(n_list);
    c.replicates = replicates;
    c.steps_per_period = 256;
    c.mode = EstimatorMode::oracle_divergence;
    c.master_seed = kMasterSeed;
    c.workers = kWorkers;
    return c;
}

Outcome criterion1() {
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    for (double h : {0.6, 0.7}) {
        const Eigen::MatrixXd l = fgn_cholesky_factor(HurstExponent(h), 1.0, kCholeskyCount);
        const Eigen::MatrixXd t = fgn_covariance_matrix(HurstExponent(h), 1.0, kCholeskyCount);
        worst = std::max(worst, (l * l.transpose() - t).cwiseAbs().maxCoeff());
    }

    const HurstExponent h(0.7);
    std::vector<std::vector<double>> per_rep(6, std::vector<double>(kCirculantReplicates));
    for (std::size_t r = 0; r < kCirculantReplicates; ++r) {
        const auto x = generate_fgn_circulant({h, 1.0, kCirculantCount, 7000 + r});
        for (std::size_t lag = 0; lag < 6; ++lag) {
            double s = 0.0;
            for (std::size_t i = 0; i + lag < x.size(); ++i) s += x[i] * x[i + lag];
            per_rep[lag][r] = s / static_cast<double>(x.size() - lag);
        }
    }
    double worst_z = 0.0;
    for (std::size_t lag = 0; lag < 6; ++lag) {
        double mean = 0.0, ss = 0.0;
        for (double v : per_rep[lag]) mean += v;
        mean /= kCirculantReplicates;
        for (double v : per_rep[lag]) ss += (v - mean) * (v - mean);
        const double se = std::sqrt(ss / (kCirculantReplicates - 1) / kCirculantReplicates);
        worst_z = std::max(worst_z, std::abs(mean - fgn_autocovariance(h, lag)) / se);
    }
    const double secs = seconds_since(t0);
    return {worst <= kCholeskyTol && worst_z <= kAutocovSe && secs <= kRuntime1,
            "max|LL^T-T| = " + fmt("%.2e", worst) + ", worst autocov |z| = " + fmt("%.2f", worst_z) +
                " (<= 4), " + fmt("%.1f", secs) + " s"};
}

double exact_cell_sum(const ScalarFunction& f, const ScalarFunction& g, HurstExponent hurst) {
    const double w = 1.0 / static_cast<double>(kBruteCells);
    std::vector<double> fv(kBruteCells), gv(kBruteCells), rho(kBruteCells);
    for (std::size_t i = 0; i < kBruteCells; ++i) {
        fv[i] = f((i + 0.5) * w);
        gv[i] = g((i + 0.5) * w);
        rho[i] = fgn_autocovariance(hurst, i);
    }
    double total = 0.0;
    for (std::size_t i = 0; i < kBruteCells; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < kBruteCells; ++j) row += gv[j] * rho[i > j ? i - j : j - i];
        total += fv[i] * row;
    }
    return std::pow(w, hurst.twice()) * total;
}

Outcome criterion2() {
    const auto t0 = std::chrono::steady_clock::now();
    double anchor = 0.0;
    for (double h : {0.55, 0.6, 0.65, 0.7, 0.74}) {
        anchor = std::max(anchor, std::abs(singular_pair_integral([](double) { return 1.0; },
                                                                  [](double) { return 1.0; }, HurstExponent(h)) -
                                           1.0));
    }
    const HurstExponent hurst(0.65);
    const std::vector<ScalarFunction> fs = {sine_basis(1), cosine_basis(1)};
    double brute = 0.0;
    for (std::size_t i = 0; i < fs.size(); ++i) {
        for (std::size_t j = i; j < fs.size(); ++j) {
            brute = std::max(brute, std::abs(singular_pair_integral(fs[i], fs[j], hurst) -
                                             exact_cell_sum(fs[i], fs[j], hurst)));
        }
    }
    const double secs = seconds_since(t0);
    return {anchor <= kAnchorTol && brute <= kBruteTol && secs <= kRuntime2,
            "anchor error " + fmt("%.2e", anchor) + ", brute-force gap " + fmt("%.2e", brute) + ", " +
                fmt("%.2f", secs) + " s"};
}

Outcome criterion3() {
    std::mt19937_64 gen(31);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    std::uniform_int_distribution<int> dim(1, 8);
    double worst = 0.0;
    for (int trial = 0; trial < kRandomDesigns; ++trial) {
        const int p = dim(gen);
        Eigen::VectorXd lam(p);
        for (int i = 0; i < p; ++i) lam[i] = u(gen);
        const std::size_t n = 1 + static_cast<std::size_t>(gen() % 1000);
        const double b = static_cast<double>(n) * (lam.squaredNorm() + 0.01 + std::abs(u(gen)));
        const DesignMatrices d = make_design(n, lam, b);
        const Eigen::MatrixXd prod = d.Q() * invert_Q_closed_form(d);
        worst = std::max(worst, (prod - Eigen::MatrixXd::Identity(p + 1, p + 1)).cwiseAbs().maxCoeff());
    }
    return {worst <= kInverseTol, "max|Q Q^-1 - I| = " + fmt("%.2e", worst) + " over 100 designs"};
}

Outcome criterion4() {
    const auto t0 = std::chrono::steady_clock::now();
    const FouModel m = noiseless_model();
    const SamplePath path = simulate_path(m, 50, 1.0 / 1024, kMasterSeed, true);
    try {
        const EstimateResult r = estimate(path);
        const double err = (r.theta_hat - m.theta()).cwiseAbs().maxCoeff();
        const double secs = seconds_since(t0);
        return {err <= kNoiselessTol && secs <= kRuntime4,
                "|theta_hat - theta|_inf = " + fmt("%.2e", err) + ", " + fmt("%.2f", secs) + " s"};
    } catch (const DegenerateDesign&) {
        const DesignMatrices d = build_design(path);
        return {false, "DegenerateDesign: stationary noiseless path lies in span{sin, cos}, b/n - |Lambda_n|^2 = " +
                           fmt("%.2e", d.residual_variance) + " <= 1e-12"};
    }
}

Outcome criterion5() {
    const auto t0 = std::chrono::steady_clock::now();
    const ExperimentReport r = run_consistency(study_config({25, 50, 100, 200}, 200));
    const SizeAggregate& first = r.aggregates.front();
    const SizeAggregate& last = r.aggregates.back();
    bool pass = true;
    double worst_ratio = 0.0, worst_bias = 0.0;
    for (Eigen::Index j = 0; j < r.theta.size(); ++j) {
        const double ratio = last.rmse[j] / first.rmse[j];
        const double z = std::abs(last.bias[j]) / last.bias_standard_error[j];
        worst_ratio = std::max(worst_ratio, ratio);
        worst_bias = std::max(worst_bias, z);
        pass = pass && ratio <= kRmseRatio && z <= kBiasSe;
    }
    const double secs = seconds_since(t0);
    return {pass && secs <= kRuntime5 && last.excluded == 0,
            "worst RMSE(200)/RMSE(25) = " + fmt("%.3f", worst_ratio) + ", worst |bias|/SE at n=200 = " +
                fmt("%.2f", worst_bias) + ", " + fmt("%.1f", secs) + " s"};
}

Outcome criterion6() {
    const auto t0 = std::chrono::steady_clock::now();
    const ExperimentReport r = run_clt(study_config({200}, 500),
                                       CltThresholds{kMuBlockDistance, kMaxSkew, kMaxExcessKurtosis});
    const SizeAggregate& a = r.aggregates.front();
    double skew = 0.0, kurt = 0.0;
    for (Eigen::Index j = 0; j < a.skewness.size(); ++j) {
        skew = std::max(skew, std::abs(a.skewness[j]));
        kurt = std::max(kurt, std::abs(a.excess_kurtosis[j]));
    }
    const double secs = seconds_since(t0);
    const bool pass = *r.mu_block_distance <= kMuBlockDistance && skew <= kMaxSkew && kurt <= kMaxExcessKurtosis &&
                      secs <= kRuntime6;
    return {pass, "mu-block relative Frobenius = " + fmt("%.3f", *r.mu_block_distance) + " (<= 0.25), max|skew| = " +
                      fmt("%.3f", skew) + ", max|excess kurtosis| = " + fmt("%.3f", kurt) + ", " +
                      fmt("%.1f", secs) + " s"};
}

Outcome criterion7() {
    McConfig c = study_config({50, 200}, kL2Replicates);
    c.master_seed = kMasterSeed + 7;
    const FouModel& m = c.model;
    const auto aggregates = aggregate_records(run_replicates(c), m.theta(), m.hurst);
    const double bound = m.basis.bound() * m.basis.bound();
    bool pass = true;
    std::string detail;
    for (std::size_t i = 0; i < m.p(); ++i) {
        const auto idx = static_cast<Eigen::Index>(i);
        const double v50 = aggregates[0].scaled_noise_variance[idx];
        const double v200 = aggregates[1].scaled_noise_variance[idx];
        const double se_scale = std::sqrt(2.0 / static_cast<double>(kL2Replicates - 1));
        const double trend_se = std::hypot(v50 * se_scale, v200 * se_scale);
        pass = pass && v50 <= bound && v200 <= bound && (v200 - v50) <= kTrendSe * trend_se;
        detail += m.basis[i].name() + ": Var " + fmt("%.4f", v50) + " -> " + fmt("%.4f", v200) + "; ";
    }
    return {pass, detail + "bound C^2 = " + fmt("%.1f", bound)};
}

Outcome criterion8() {
    const FouModel m = make_model(0.7, 1.0, {0.0}, 1.0, {sine_basis(1)});
    const SamplePath path = simulate_path(m, SimulationOptions{.n_periods = 2000, .steps_per_period = 64,
                                                               .seed = kMasterSeed, .stationary_start = true,
                                                               .burn_in_periods = 50});
    double mean = 0.0;
    for (double x : path.x) mean += x;
    mean /= static_cast<double>(path.x.size());
    double ss = 0.0;
    for (double x : path.x) ss += (x - mean) * (x - mean);
    const double var = ss / static_cast<double>(path.x.size() - 1);
    const double target = stationary_variance(1.0, 1.0, m.hurst);
    const double rel = std::abs(var - target) / target;
    return {rel <= kStationaryRelTol,
            "sample variance " + fmt("%.4f", var) + " vs " + fmt("%.4f", target) + " (rel " + fmt("%.3f", rel) + ")"};
}

Outcome criterion9() {
    bool pass = true;
    std::string detail;
    for (double alpha : {0.5, 1.0, 2.0}) {
        CouplingConfig c;
        c.model = study_model();
        c.model.alpha = alpha;
        c.model.xi0 = 3.0;
        c.n_periods = 10;
        c.steps_per_period = 256;
        c.seed = kMasterSeed;
        const CouplingReport r = run_coupling(c);
        const bool ok = r.log_slope && std::abs(*r.log_slope + alpha) <= kSlopeRelTol * alpha;
        pass = pass && ok;
        detail += "alpha " + fmt("%.1f", alpha) + ": slope " + (r.log_slope ? fmt("%.4f", *r.log_slope) : "n/a") + "; ";
    }
    return {pass, detail};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome criterion10() {
    const fs::path root = fs::path(PERFOU_TEST_TMP) / "determinism";
    fs::remove_all(root);
    fs::create_directories(root);

    nlohmann::json noiseless = {
        {"hurst", 0.7}, {"alpha", 0.8}, {"mu", {1.0, 0.5}}, {"sigma", 0.0},
        {"basis", {{{"kind", "sin"}, {"k", 1}}, {{"kind", "cos"}, {"k", 1}}}},
        {"xi0", 0.0}, {"step_denominator", 1024}, {"n_periods", 50}, {"seed", kMasterSeed},
        {"stationary_start", true}, {"estimate", {{"mode", "naive"}}}};
    nlohmann::json study = {
        {"hurst", 0.65}, {"alpha", 1.0}, {"mu", {1.0, 2.0}}, {"sigma", 0.5},
        {"basis", {{{"kind", "sin"}, {"k", 1}}, {{"kind", "cos"}, {"k", 1}}}},
        {"xi0", 0.0}, {"step_denominator", 256}, {"n_periods", 200}, {"seed", kMasterSeed},
        {"stationary_start", true},
        {"mc", {{"n_list", {25, 50, 100, 200}}, {"replicates", 200}, {"master_seed", kMasterSeed}, {"mode", "oracle"}}}};
    std::ofstream(root / "noiseless.json") << noiseless.dump(2);
    std::ofstream(root / "study.json") << study.dump(2);

    const std::vector<std::vector<std::string>> runs = {
        {"estimate", "--config", (root / "noiseless.json").string()},
        {"mc-consistency", "--config", (root / "study.json").string()},
        {"mc-clt", "--config", (root / "study.json").string(), "--set", "mc.n_list=[200]", "--set", "mc.replicates=500"},
    };
    for (std::size_t workers : {std::size_t{1}, kWorkers}) {
        const fs::path out = root / ("workers" + std::to_string(workers));
        for (auto args : runs) {
            args.insert(args.end(), {"--out", out.string(), "--workers", std::to_string(workers)});
            std::ostringstream sink, err;
            const int code = run_cli(args, sink, err);
            if (code == kExitConfigError) return {false, "CLI error: " + err.str()};
        }
    }

    std::size_t compared = 0;
    for (const auto& entry : fs::directory_iterator(root / "workers1")) {
        const fs::path other = root / ("workers" + std::to_string(kWorkers)) / entry.path().filename();
        if (!fs::exists(other) || slurp(entry.path()) != slurp(other)) {
            return {false, "artifact differs: " + entry.path().filename().string()};
        }
        ++compared;
    }
    return {compared >= 5, std::to_string(compared) + " artifacts byte-identical for 1 vs 4 workers"};
}

const std::vector<std::pair<std::string, std::function<Outcome()>>>& criteria() {
    static const std::vector<std::pair<std::string, std::function<Outcome()>>> list = {
        {"exact-covariance sampling", criterion1},
        {"quadrature anchor", criterion2},
        {"closed-form inverse", criterion3},
        {"noiseless recovery", criterion4},
        {"consistency", criterion5},
        {"CLT covariance and normality", criterion6},
        {"L2 boundedness of n^-H R_n", criterion7},
        {"stationary variance", criterion8},
        {"coupling decay", criterion9},
        {"determinism across worker counts", criterion10},
    };
    return list;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::size_t> selected;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--criterion" && i + 1 < argc) {
            selected.push_back(std::stoul(argv[++i]));
        } else {
            std::cerr << "usage: perfou_acceptance [--criterion N]...\n";
            return 2;
        }
    }
    if (selected.empty()) {
        for (std::size_t i = 1; i <= criteria().size(); ++i) selected.push_back(i);
    }

    bool all = true;
    for (std::size_t id : selected) {
        if (id < 1 || id > criteria().size()) {
            std::cerr << "no criterion " << id << '\n';
            return 2;
        }
        const auto& [name, run] = criteria()[id - 1];
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        all = all && o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << name << "): " << o.detail
                  << std::endl;
    }
    return all ? 0 : 1;
}
