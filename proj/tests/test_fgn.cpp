#include <catch_amalgamated.hpp>

#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "perfou/errors.hpp"
#include "perfou/fgn.hpp"
#include "perfou/rng.hpp"

using namespace perfou;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("autocovariance special values", "[fgn]") {
    CHECK(fgn_autocovariance(HurstExponent(0.75), 0) == 1.0);
    CHECK_THAT(fgn_autocovariance(HurstExponent(0.5), 3), WithinAbs(0.0, 1e-15));
    CHECK_THAT(fgn_autocovariance(HurstExponent(0.75), 1), WithinAbs(0.4142136, 1e-7));
    for (double h : {0.1, 0.3, 0.6, 0.9}) CHECK(fgn_autocovariance(HurstExponent(h), 0) == 1.0);
}

TEST_CASE("autocovariance against 40-digit reference values", "[fgn]") {
    // mpmath, 40 digits
    struct Row {
        double h;
        std::size_t lag;
        double value;
    };
    const Row rows[] = {
        {0.51, 1, 0.01395947979002913869},   {0.51, 10, 0.0010698050544656246478},
        {0.51, 100, 0.00011184258454345377525}, {0.6, 1, 0.1486983549970350068},
        {0.6, 10, 0.019041622119962690504},   {0.6, 100, 0.0030142998902590442903},
        {0.74, 1, 0.39474366635040542028},    {0.74, 10, 0.10733954926248219795},
        {0.74, 100, 0.032394838392827954455}, {0.75, 10, 0.11865974527090585014},
    };
    for (const auto& r : rows) {
        INFO("H=" << r.h << " lag=" << r.lag);
        CHECK_THAT(fgn_autocovariance(HurstExponent(r.h), r.lag), WithinRel(r.value, 1e-12));
    }
}

TEST_CASE("hurst exponent domain", "[fgn]") {
    CHECK_THROWS_AS(HurstExponent(0.0), std::invalid_argument);
    CHECK_THROWS_AS(HurstExponent(1.0), std::invalid_argument);
    CHECK_THROWS_AS(HurstExponent(std::nan("")), std::invalid_argument);
    CHECK_NOTHROW(HurstExponent(0.999));
    FgnSpec bad{HurstExponent(0.6), 0.0, 4, 1};
    CHECK_THROWS(bad.validate());
    bad.step = 0.1;
    bad.count = 0;
    CHECK_THROWS(bad.validate());
}

TEST_CASE("row sums of the covariance telescope to N^{2H}", "[fgn]") {
    for (double h : {0.3, 0.6, 0.7}) {
        for (std::size_t n : {1u, 7u, 64u, 256u}) {
            const Eigen::MatrixXd t = fgn_covariance_matrix(HurstExponent(h), 1.0, n);
            CHECK_THAT(t.sum(), WithinRel(std::pow(static_cast<double>(n), 2.0 * h), 1e-8));
        }
    }
}

TEST_CASE("single circulant increment is step^H times the first normal", "[fgn]") {
    const FgnSpec spec{HurstExponent(0.7), 0.25, 1, 42};
    NormalStream z(42);
    const auto inc = generate_fgn_circulant(spec);
    REQUIRE(inc.size() == 1);
    CHECK_THAT(inc[0], WithinRel(std::pow(0.25, 0.7) * z(), 1e-14));
}

TEST_CASE("samplers are deterministic in the seed", "[fgn]") {
    const FgnSpec spec{HurstExponent(0.65), 1.0 / 64, 1000, 9};
    CHECK(generate_fgn_circulant(spec) == generate_fgn_circulant(spec));
    CHECK(generate_fgn_cholesky({HurstExponent(0.65), 0.1, 50, 9}) ==
          generate_fgn_cholesky({HurstExponent(0.65), 0.1, 50, 9}));
    FgnSpec other = spec;
    other.seed = 10;
    CHECK(generate_fgn_circulant(spec) != generate_fgn_circulant(other));
}

TEST_CASE("cholesky factor reproduces the Toeplitz covariance", "[fgn]") {
    for (double h : {0.6, 0.7}) {
        const Eigen::MatrixXd l = fgn_cholesky_factor(HurstExponent(h), 1.0, 64);
        const Eigen::MatrixXd t = fgn_covariance_matrix(HurstExponent(h), 1.0, 64);
        CHECK((l * l.transpose() - t).cwiseAbs().maxCoeff() <= 1e-10);
        CHECK(l.isLowerTriangular());
    }
    SECTION("Brownian case is a scaled identity") {
        const double step = 0.3;
        const Eigen::MatrixXd l = fgn_cholesky_factor(HurstExponent(0.5), step, 3);
        CHECK((l - std::sqrt(step) * Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-15);
    }
    SECTION("size guard") {
        CHECK_THROWS_AS(fgn_cholesky_factor(HurstExponent(0.6), 1.0, 65, 64), FactorizationFailure);
        CHECK_THROWS_AS(generate_fgn_cholesky({HurstExponent(0.6), 1.0, kCholeskyMaxCount + 1, 1}),
                        FactorizationFailure);
    }
}

TEST_CASE("circulant and Cholesky samplers agree in law", "[fgn]") {
    const HurstExponent h(0.7);
    const std::size_t count = 512;
    const std::size_t draws = 10000;
    const std::size_t positions[] = {0, 255, 508};
    double sums[3][4] = {};
    for (std::size_t r = 0; r < draws; ++r) {
        const auto x = generate_fgn_circulant({h, 1.0, count, 1000 + r});
        for (int p = 0; p < 3; ++p) {
            for (int lag = 0; lag < 4; ++lag) sums[p][lag] += x[positions[p]] * x[positions[p] + lag];
        }
    }
    for (int p = 0; p < 3; ++p) {
        for (int lag = 0; lag < 4; ++lag) {
            const double rho = fgn_autocovariance(h, static_cast<std::size_t>(lag));
            const double se = std::sqrt((1.0 + rho * rho) / static_cast<double>(draws));
            INFO("position " << positions[p] << " lag " << lag);
            CHECK(std::abs(sums[p][lag] / draws - rho) <= 5.0 * se);
        }
    }
}

TEST_CASE("increments scale as step^{2H}", "[fgn]") {
    const double step = 1.0 / 256;
    const HurstExponent h(0.6);
    double ss = 0.0;
    std::size_t total = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        for (double v : generate_fgn({h, step, 4096, seed})) {
            ss += v * v;
            ++total;
        }
    }
    CHECK_THAT(ss / static_cast<double>(total), WithinRel(std::pow(step, 1.2), 0.05));
}

TEST_CASE("fbm_from_fgn is a cumulative sum from zero", "[fgn]") {
    const std::vector<double> inc = {1.0, 1.0, 1.0};
    const FbmPath path = fbm_from_fgn(inc, 1.0, HurstExponent(0.6));
    CHECK(path.values == std::vector<double>{0.0, 1.0, 2.0, 3.0});
    CHECK(path.grid == std::vector<double>{0.0, 1.0, 2.0, 3.0});
    CHECK_THROWS(fbm_from_fgn(std::vector<double>{}, 1.0, HurstExponent(0.6)));

    const auto noise = generate_fgn({HurstExponent(0.7), 0.01, 300, 3});
    const FbmPath b = fbm_from_fgn(noise, 0.01, HurstExponent(0.7));
    CHECK(b.values.front() == 0.0);
    CHECK(b.values.back() == std::accumulate(noise.begin(), noise.end(), 0.0));
}

TEST_CASE("two-sided driver", "[fgn]") {
    const FgnSpec spec{HurstExponent(0.7), 0.5, 20, 5};
    CHECK_THROWS_AS(generate_two_sided_driver(spec, 0), std::invalid_argument);

    const FbmPath d = generate_two_sided_driver(spec, 12);
    REQUIRE(d.values.size() == 33);
    CHECK(d.grid.front() == -6.0);
    CHECK(d.grid[12] == 0.0);
    CHECK(d.values[12] == 0.0);

    // One joint draw: the past and future blocks come from a single stationary vector.
    FgnSpec joint = spec;
    joint.count = 32;
    const auto inc = generate_two_sided_increments(spec, 12);
    CHECK(inc == generate_fgn(joint));
    for (std::size_t k = 0; k < 32; ++k) {
        CHECK_THAT(d.values[k + 1] - d.values[k], WithinAbs(inc[k], 1e-12));
    }
}

TEST_CASE("fbm CSV dump", "[fgn]") {
    const FbmPath path = fbm_from_fgn(std::vector<double>{0.1, 1.0 / 3.0}, 0.5, HurstExponent(0.6));
    std::ostringstream out;
    write_fbm_csv(path, out);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "t,value");
    std::vector<double> values;
    while (std::getline(in, line)) values.push_back(std::stod(line.substr(line.find(',') + 1)));
    CHECK(values == path.values);
}
