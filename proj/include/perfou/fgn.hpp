#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace perfou {

// Hurst index of the driving fBm, 0 < H < 1.
class HurstExponent {
public:
    explicit HurstExponent(double value);

    double value() const noexcept { return value_; }
    double twice() const noexcept { return 2.0 * value_; }

    friend bool operator==(HurstExponent, HurstExponent) = default;

private:
    double value_;
};

inline constexpr std::size_t kCholeskyMaxCount = std::size_t{1} << 13;

struct FgnSpec {
    HurstExponent hurst;
    double step = 1.0;        // grid spacing, > 0
    std::size_t count = 1;    // number of increments, >= 1
    std::uint64_t seed = 0;

    void validate() const;
};

// Uniform-grid fBm values; values[k] = B^H at grid[k].
struct FbmPath {
    std::vector<double> grid;
    std::vector<double> values;
    HurstExponent hurst;
};

// rho_H(lag) = 1/2 ((lag+1)^{2H} + |lag-1|^{2H} - 2 lag^{2H}), unit step.
double fgn_autocovariance(HurstExponent hurst, std::size_t lag);

// Toeplitz covariance step^{2H} rho_H(|i-j|) of `count` increments.
Eigen::MatrixXd fgn_covariance_matrix(HurstExponent hurst, double step, std::size_t count);

// Exact sampler by circulant embedding (power-of-two size >= 2(count-1)).
// Throws NonnegativeEmbeddingFailure if an eigenvalue is below -1e-10 * max eigenvalue.
std::vector<double> generate_fgn_circulant(const FgnSpec& spec);

// Lower Cholesky factor of the increment covariance.
Eigen::MatrixXd fgn_cholesky_factor(HurstExponent hurst, double step, std::size_t count,
                                    std::size_t max_count = kCholeskyMaxCount);

std::vector<double> generate_fgn_cholesky(const FgnSpec& spec,
                                          std::size_t max_count = kCholeskyMaxCount);

// Circulant sampler with Cholesky fallback on embedding failure.
std::vector<double> generate_fgn(const FgnSpec& spec);

// Cumulative sum with B_0 = 0; values has increments.size() + 1 entries.
FbmPath fbm_from_fgn(std::span<const double> increments, double step, HurstExponent hurst);

// One jointly correlated increment vector covering [-past_count*step, count*step].
// The first past_count entries belong to the past.
std::vector<double> generate_two_sided_increments(const FgnSpec& spec, std::size_t past_count);

// Same draw as generate_two_sided_increments, as a path anchored at B_0 = 0.
FbmPath generate_two_sided_driver(const FgnSpec& spec, std::size_t past_count);

// CSV with header "t,value", 17 significant digits.
void write_fbm_csv(const FbmPath& path, std::ostream& out);

}  // namespace perfou
