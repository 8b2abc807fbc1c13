#include <cmath>

#include "doctest.h"
#include "psqr/rng.hpp"
#include "psqr/stats.hpp"

using namespace psqr;

TEST_CASE("normal quantile hits reference values") {
    CHECK(std::abs(normal_quantile(0.975) - 1.959963984540054) < 1e-9);
    CHECK(std::abs(normal_quantile(0.5)) < 1e-12);
    CHECK(std::abs(normal_quantile(0.841344746068543) - 1.0) < 1e-9);
    CHECK(normal_quantile(0.01) == doctest::Approx(-2.3263478740408408).epsilon(1e-9));
    CHECK_THROWS_AS(normal_quantile(0.0), std::invalid_argument);
    CHECK_THROWS_AS(normal_quantile(1.0), std::invalid_argument);
}

TEST_CASE("normal cdf and quantile invert each other") {
    for (double p : {1e-6, 0.01, 0.3, 0.5, 0.77, 0.99, 1.0 - 1e-6})
        CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-10));
}

TEST_CASE("sample quantile and IQR") {
    std::vector<double> v{4.0, 1.0, 3.0, 2.0, 5.0};
    CHECK(sample_quantile(v, 0.5) == 3.0);
    CHECK(sample_quantile(v, 0.0) == 1.0);
    CHECK(sample_quantile(v, 1.0) == 5.0);
    CHECK(interquartile_range(v) == doctest::Approx(2.0));
    CHECK_THROWS_AS(sample_quantile({}, 0.5), std::invalid_argument);
}

TEST_CASE("KS distance is tiny for a near-perfect normal sample") {
    const int n = 2000;
    std::vector<double> sample(n);
    for (int i = 0; i < n; ++i)
        sample[static_cast<size_t>(i)] = normal_quantile((i + 0.5) / n);
    CHECK(ks_to_standard_normal(sample) < 1.0 / n + 1e-9);
}

TEST_CASE("KS distance detects a shifted sample") {
    const int n = 500;
    std::vector<double> sample(n);
    for (int i = 0; i < n; ++i)
        sample[static_cast<size_t>(i)] = 1.0 + normal_quantile((i + 0.5) / n);
    CHECK(ks_to_standard_normal(sample) > 0.3);
}

TEST_CASE("gaussian kde integrates to about one") {
    Rng rng(5);
    Eigen::VectorXd sample(400);
    for (int i = 0; i < sample.size(); ++i) sample[i] = rng.normal();
    Eigen::VectorXd grid(801);
    for (int i = 0; i < grid.size(); ++i) grid[i] = -8.0 + 0.02 * i;
    const Eigen::VectorXd dens = gaussian_kde(sample, 0.3, grid);
    CHECK(dens.minCoeff() >= 0.0);
    CHECK(dens.sum() * 0.02 == doctest::Approx(1.0).epsilon(1e-3));
}
