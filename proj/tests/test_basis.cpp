#include <cmath>

#include "doctest.h"
#include "psqr/basis.hpp"
#include "psqr/rng.hpp"
#include "psqr/solver.hpp"

using namespace psqr;

TEST_CASE("build_basis produces equidistant knots and the right dimension") {
    const BasisSpec spec = build_basis(3, 5);
    CHECK(spec.dim() == 8);
    for (int k = -2; k <= 8; ++k)
        CHECK(spec.knot(k) == doctest::Approx(k / 5.0).epsilon(1e-15));
    // spacing is uniformly 1/K
    for (int k = -3; k < 8; ++k)
        CHECK(spec.knot(k + 1) - spec.knot(k) == doctest::Approx(0.2).epsilon(1e-12));

    const BasisSpec degenerate = build_basis(0, 1);
    CHECK(degenerate.dim() == 1);
    CHECK(degenerate.knot(0) == 0.0);
    CHECK(degenerate.knot(1) == 1.0);

    const BasisSpec linear = build_basis(1, 2);
    CHECK(linear.dim() == 3);
    CHECK(linear.knot(-1) == doctest::Approx(-0.5));
    CHECK(linear.knot(0) == 0.0);
    CHECK(linear.knot(1) == doctest::Approx(0.5));
    CHECK(linear.knot(2) == 1.0);
    CHECK(linear.knot(3) == doctest::Approx(1.5));
}

TEST_CASE("build_basis rejects bad configuration") {
    CHECK_THROWS_AS(build_basis(-1, 5), std::invalid_argument);
    CHECK_THROWS_AS(build_basis(3, 0), std::invalid_argument);
    CHECK_THROWS_AS(build_basis(11, 5), std::invalid_argument);
}

TEST_CASE("eval_basis matches hand evaluation for the linear case") {
    const BasisSpec spec = build_basis(1, 2);
    const Eigen::VectorXd b = eval_basis(spec, 0.25);
    REQUIRE(b.size() == 3);
    CHECK(b[0] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(b[1] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(b[2] == 0.0);
}

TEST_CASE("degree-0 basis selects the right-closed bin") {
    const BasisSpec spec = build_basis(0, 4);
    Eigen::VectorXd b = eval_basis(spec, 0.3);  // (0.25, 0.5] is bin 2
    CHECK(b[0] == 0.0);
    CHECK(b[1] == 1.0);
    CHECK(b[2] == 0.0);
    CHECK(b[3] == 0.0);
    b = eval_basis(spec, 0.25);  // knot itself belongs to the left bin
    CHECK(b[0] == 1.0);
    b = eval_basis(spec, 0.0);  // first interval closed at 0
    CHECK(b[0] == 1.0);
    b = eval_basis(spec, 1.0);  // last basis nonzero at 1
    CHECK(b[3] == 1.0);
}

TEST_CASE("eval_basis rejects x outside the unit interval") {
    const BasisSpec spec = build_basis(2, 3);
    CHECK_THROWS_AS(eval_basis(spec, -0.01), std::invalid_argument);
    CHECK_THROWS_AS(eval_basis(spec, 1.01), std::invalid_argument);
}

TEST_CASE("partition of unity over random specs and points") {
    Rng rng(20240901);
    for (int trial = 0; trial < 10000; ++trial) {
        const int p = static_cast<int>(rng.uniform01() * 6);       // 0..5
        const int K = 1 + static_cast<int>(rng.uniform01() * 50);  // 1..50
        const double x = rng.uniform01();
        const BasisSpec spec = build_basis(p, K);
        const Eigen::VectorXd b = eval_basis(spec, x);
        CHECK(std::abs(b.sum() - 1.0) < 1e-12);
        CHECK(b.minCoeff() >= 0.0);
        CHECK(b.maxCoeff() <= 1.0 + 1e-12);
        int nonzero = 0;
        for (int g = 0; g < b.size(); ++g)
            if (b[g] != 0.0) ++nonzero;
        CHECK(nonzero <= p + 1);
    }
}

TEST_CASE("local support: B_k vanishes off (kappa_{k-1}, kappa_{k+p}]") {
    Rng rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const int p = static_cast<int>(rng.uniform01() * 4);
        const int K = 2 + static_cast<int>(rng.uniform01() * 10);
        const BasisSpec spec = build_basis(p, K);
        const double x = rng.uniform01();
        const Eigen::VectorXd b = eval_basis(spec, x);
        for (int g = 0; g < spec.dim(); ++g) {
            const int k = g - p + 1;
            const bool inside = x > spec.knot(k - 1) && x <= spec.knot(k + p);
            const bool at_zero_edge = x == 0.0 && spec.knot(k - 1) <= 0.0 && spec.knot(k + p) >= 0.0;
            if (!inside && !at_zero_edge) CHECK(b[g] == 0.0);
        }
    }
}

TEST_CASE("spline_value reproduces constants and kills their derivative") {
    const BasisSpec spec = build_basis(3, 7);
    const Eigen::VectorXd coef = Eigen::VectorXd::Constant(spec.dim(), 4.25);
    for (double x : {0.0, 0.17, 0.5, 0.99, 1.0}) {
        CHECK(spline_value(spec, coef, x) == doctest::Approx(4.25).epsilon(1e-14));
        CHECK(spline_value(spec, coef, x, 1) == doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("spline derivative of an interpolated line is its slope") {
    const BasisSpec spec = build_basis(3, 6);
    const int n = 200;
    Eigen::VectorXd xs(n), ys(n);
    for (int i = 0; i < n; ++i) {
        xs[i] = static_cast<double>(i) / (n - 1);
        ys[i] = 2.0 * xs[i];
    }
    const Eigen::VectorXd coef =
        fit_penalized_mean(Dataset(xs, ys), spec, nullptr, 0.0);
    CHECK(spline_value(spec, coef, 0.5, 1) == doctest::Approx(2.0).epsilon(1e-8));
    CHECK(spline_value(spec, coef, 0.5) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("derivative identity agrees with central finite differences") {
    Rng rng(99);
    const BasisSpec spec = build_basis(3, 10);
    Eigen::VectorXd coef(spec.dim());
    for (int g = 0; g < coef.size(); ++g) coef[g] = rng.normal();
    const double h1 = 1e-5;
    const double h2 = 1e-4;  // rounding-optimal scale for second differences
    for (double x : {0.11, 0.33, 0.52, 0.78, 0.89}) {
        const double fd1 =
            (spline_value(spec, coef, x + h1) - spline_value(spec, coef, x - h1)) / (2.0 * h1);
        const double d1 = spline_value(spec, coef, x, 1);
        CHECK(std::abs(fd1 - d1) / std::max(1.0, std::abs(d1)) < 1e-5);
        const double fd2 = (spline_value(spec, coef, x + h2) - 2.0 * spline_value(spec, coef, x) +
                            spline_value(spec, coef, x - h2)) /
                           (h2 * h2);
        const double d2 = spline_value(spec, coef, x, 2);
        CHECK(std::abs(fd2 - d2) / std::max(1.0, std::abs(d2)) < 1e-5);
    }
}

TEST_CASE("spline_value rejects derivative orders above the degree") {
    const BasisSpec spec = build_basis(2, 4);
    const Eigen::VectorXd coef = Eigen::VectorXd::Zero(spec.dim());
    CHECK_THROWS_AS(spline_value(spec, coef, 0.5, 3), std::invalid_argument);
    CHECK_THROWS_AS(spline_value(spec, coef, 0.5, -1), std::invalid_argument);
    CHECK_THROWS_AS(spline_value(spec, Eigen::VectorXd::Zero(2), 0.5), std::invalid_argument);
}

TEST_CASE("Bernoulli polynomials match their closed forms") {
    CHECK(bernoulli_poly(0, 0.3) == 1.0);
    CHECK(bernoulli_poly(1, 0.5) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(bernoulli_poly(2, 0.5) == doctest::Approx(-1.0 / 12.0).epsilon(1e-14));
    CHECK(bernoulli_poly(4, 0.0) == doctest::Approx(-1.0 / 30.0).epsilon(1e-14));
    for (double x = 0.0; x <= 1.0; x += 0.05)
        CHECK(bernoulli_poly(2, x) == doctest::Approx(x * x - x + 1.0 / 6.0).epsilon(1e-14));
    CHECK_THROWS_AS(bernoulli_poly(-1, 0.5), std::invalid_argument);
}

TEST_CASE("Bernoulli derivative recurrence holds numerically") {
    const double h = 1e-6;
    for (int n = 1; n <= 6; ++n) {
        for (double x : {0.1, 0.37, 0.64, 0.92}) {
            const double fd = (bernoulli_poly(n, x + h) - bernoulli_poly(n, x - h)) / (2.0 * h);
            CHECK(std::abs(fd - n * bernoulli_poly(n - 1, x)) < 1e-6);
        }
    }
}

TEST_CASE("design matrix rows sum to one with at most p+1 entries in [0,1]") {
    Rng rng(4242);
    const BasisSpec spec = build_basis(3, 8);
    Eigen::VectorXd xs(50);
    for (int i = 0; i < xs.size(); ++i) xs[i] = rng.uniform01();
    const DesignMatrix Z = design_matrix(spec, xs);
    CHECK(Z.rows == 50);
    CHECK(Z.cols == spec.dim());
    CHECK(Z.band == 4);
    const Eigen::MatrixXd dense = Z.dense();
    for (int i = 0; i < Z.rows; ++i) {
        CHECK(dense.row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(dense.row(i).minCoeff() >= 0.0);
        CHECK(dense.row(i).maxCoeff() <= 1.0 + 1e-12);
        int nonzero = 0;
        for (int g = 0; g < Z.cols; ++g)
            if (dense(i, g) != 0.0) ++nonzero;
        CHECK(nonzero <= spec.degree() + 1);
    }
    // multiply agrees with the dense product
    Eigen::VectorXd coef(spec.dim());
    for (int g = 0; g < coef.size(); ++g) coef[g] = rng.normal();
    const Eigen::VectorXd ref = dense * coef;
    const Eigen::VectorXd got = Z.multiply(coef);
    for (int i = 0; i < Z.rows; ++i) CHECK(got[i] == doctest::Approx(ref[i]).epsilon(1e-13));
}
