#include "perfou/fgn.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdio>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>

#include <fftw3.h>

#include "perfou/errors.hpp"
#include "perfou/rng.hpp"

namespace perfou {

namespace {

// FFTW planning is not thread-safe; execution is.
std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

// In-place forward DFT.
void forward_dft(std::vector<std::complex<double>>& data) {
    if (data.size() < 2) return;
    auto* buf = reinterpret_cast<fftw_complex*>(data.data());
    fftw_plan plan;
    {
        std::lock_guard lock(fftw_planner_mutex());
        plan = fftw_plan_dft_1d(static_cast<int>(data.size()), buf, buf, FFTW_FORWARD,
                                FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
}

std::size_t embedding_size(std::size_t count) {
    return std::bit_ceil(std::max<std::size_t>(1, 2 * (count - 1)));
}

// sqrt(lambda_j / M) for the circulant embedding of rho_H, keyed by (H, M).
std::shared_ptr<const std::vector<double>> spectral_amplitudes(HurstExponent hurst,
                                                               std::size_t m) {
    using Key = std::pair<double, std::size_t>;
    static std::mutex cache_mutex;
    static std::map<Key, std::shared_ptr<const std::vector<double>>> cache;

    const Key key{hurst.value(), m};
    {
        std::lock_guard lock(cache_mutex);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
    }

    std::vector<std::complex<double>> row(m);
    for (std::size_t j = 0; j < m; ++j) {
        row[j] = fgn_autocovariance(hurst, std::min(j, m - j));
    }
    forward_dft(row);

    double max_eig = 0.0;
    for (const auto& v : row) max_eig = std::max(max_eig, v.real());
    const double tolerance = 1e-10 * max_eig;

    auto amplitudes = std::make_shared<std::vector<double>>(m);
    for (std::size_t j = 0; j < m; ++j) {
        const double lambda = row[j].real();
        if (lambda < -tolerance) {
            throw NonnegativeEmbeddingFailure("circulant eigenvalue " + std::to_string(lambda) +
                                              " at index " + std::to_string(j));
        }
        (*amplitudes)[j] = std::sqrt(std::max(lambda, 0.0) / static_cast<double>(m));
    }

    std::lock_guard lock(cache_mutex);
    auto [it, inserted] = cache.emplace(key, std::move(amplitudes));
    return it->second;
}

}  // namespace

HurstExponent::HurstExponent(double value) : value_(value) {
    if (!(value > 0.0 && value < 1.0)) {
        throw std::invalid_argument("Hurst exponent must lie in (0,1), got " +
                                    std::to_string(value));
    }
}

void FgnSpec::validate() const {
    if (!(step > 0.0) || !std::isfinite(step)) {
        throw std::invalid_argument("fGn step must be positive");
    }
    if (count < 1) throw std::invalid_argument("fGn count must be at least 1");
}

double fgn_autocovariance(HurstExponent hurst, std::size_t lag) {
    const double two_h = hurst.twice();
    if (lag == 0) return 1.0;
    if (lag == 1) return 0.5 * (std::pow(2.0, two_h) - 2.0);

    // n^{2H}/2 [(1+x)^{2H} + (1-x)^{2H} - 2], x = 1/n, rearranged to avoid the
    // first-order cancellation: with a, b the two exponents, s = (a+b)/2, d = (a-b)/2,
    // e^a + e^b - 2 = 2 (expm1(s) cosh d + 2 sinh^2(d/2)).
    const double n = static_cast<double>(lag);
    const double x = 1.0 / n;
    const double a = two_h * std::log1p(x);
    const double b = two_h * std::log1p(-x);
    const double s = 0.5 * (a + b);
    const double d = 0.5 * (a - b);
    const double sh = std::sinh(0.5 * d);
    return std::pow(n, two_h) * (std::expm1(s) * std::cosh(d) + 2.0 * sh * sh);
}

Eigen::MatrixXd fgn_covariance_matrix(HurstExponent hurst, double step, std::size_t count) {
    const double scale = std::pow(step, hurst.twice());
    std::vector<double> rho(count);
    for (std::size_t k = 0; k < count; ++k) rho[k] = scale * fgn_autocovariance(hurst, k);

    const auto n = static_cast<Eigen::Index>(count);
    Eigen::MatrixXd cov(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            cov(i, j) = rho[static_cast<std::size_t>(std::abs(i - j))];
        }
    }
    return cov;
}

std::vector<double> generate_fgn_circulant(const FgnSpec& spec) {
    spec.validate();
    const std::size_t m = embedding_size(spec.count);
    const auto amplitudes = spectral_amplitudes(spec.hurst, m);

    NormalStream normal(spec.seed);
    std::vector<std::complex<double>> spectrum(m);
    for (std::size_t j = 0; j < m; ++j) {
        const double re = normal();
        const double im = normal();
        spectrum[j] = (*amplitudes)[j] * std::complex<double>(re, im);
    }
    forward_dft(spectrum);

    const double scale = std::pow(spec.step, spec.hurst.value());
    std::vector<double> out(spec.count);
    for (std::size_t k = 0; k < spec.count; ++k) out[k] = scale * spectrum[k].real();
    return out;
}

Eigen::MatrixXd fgn_cholesky_factor(HurstExponent hurst, double step, std::size_t count,
                                    std::size_t max_count) {
    if (count > max_count) {
        throw FactorizationFailure("Cholesky sampler limited to " + std::to_string(max_count) +
                                   " increments, requested " + std::to_string(count));
    }
    Eigen::LLT<Eigen::MatrixXd> llt(fgn_covariance_matrix(hurst, step, count));
    if (llt.info() != Eigen::Success) {
        throw FactorizationFailure("fGn covariance is not numerically positive definite");
    }
    return llt.matrixL();
}

std::vector<double> generate_fgn_cholesky(const FgnSpec& spec, std::size_t max_count) {
    spec.validate();
    const Eigen::MatrixXd lower = fgn_cholesky_factor(spec.hurst, spec.step, spec.count, max_count);

    NormalStream normal(spec.seed);
    Eigen::VectorXd z(static_cast<Eigen::Index>(spec.count));
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = normal();

    const Eigen::VectorXd draw = lower.triangularView<Eigen::Lower>() * z;
    return {draw.data(), draw.data() + draw.size()};
}

std::vector<double> generate_fgn(const FgnSpec& spec) {
    try {
        return generate_fgn_circulant(spec);
    } catch (const NonnegativeEmbeddingFailure&) {
        return generate_fgn_cholesky(spec);
    }
}

FbmPath fbm_from_fgn(std::span<const double> increments, double step, HurstExponent hurst) {
    if (increments.empty()) throw std::invalid_argument("fbm_from_fgn needs increments");
    FbmPath path{.grid = {}, .values = {}, .hurst = hurst};
    path.grid.resize(increments.size() + 1);
    path.values.resize(increments.size() + 1);
    double acc = 0.0;
    for (std::size_t k = 0; k <= increments.size(); ++k) {
        path.grid[k] = static_cast<double>(k) * step;
        path.values[k] = acc;
        if (k < increments.size()) acc += increments[k];
    }
    return path;
}

std::vector<double> generate_two_sided_increments(const FgnSpec& spec, std::size_t past_count) {
    if (past_count < 1) throw std::invalid_argument("two-sided driver needs past_count >= 1");
    FgnSpec joint = spec;
    joint.count = spec.count + past_count;
    return generate_fgn(joint);
}

FbmPath generate_two_sided_driver(const FgnSpec& spec, std::size_t past_count) {
    const std::vector<double> inc = generate_two_sided_increments(spec, past_count);
    const std::size_t total = inc.size();

    FbmPath path{.grid = {}, .values = {}, .hurst = spec.hurst};
    path.grid.resize(total + 1);
    path.values.assign(total + 1, 0.0);
    for (std::size_t k = 0; k <= total; ++k) {
        path.grid[k] = (static_cast<double>(k) - static_cast<double>(past_count)) * spec.step;
    }
    for (std::size_t k = past_count; k < total; ++k) {
        path.values[k + 1] = path.values[k] + inc[k];
    }
    for (std::size_t k = past_count; k-- > 0;) {
        path.values[k] = path.values[k + 1] - inc[k];
    }
    return path;
}

void write_fbm_csv(const FbmPath& path, std::ostream& out) {
    out << "t,value\n";
    char buf[64];
    for (std::size_t k = 0; k < path.values.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", path.grid[k], path.values[k]);
        out << buf;
    }
}

}  // namespace perfou
