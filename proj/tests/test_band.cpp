#include <cmath>

#include <Eigen/Dense>

#include "doctest.h"
#include "psqr/band.hpp"
#include "psqr/rng.hpp"

using namespace psqr;

namespace {

// random SPD matrix with the given semibandwidth
Eigen::MatrixXd random_banded_spd(int d, int bw, Rng& rng) {
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = std::max(0, i - bw); j <= i; ++j) b(i, j) = rng.normal();
    Eigen::MatrixXd a = b * b.transpose();
    // keep bandedness: b lower-banded means b*b' has semibandwidth <= bw only
    // when bw covers the full profile; zero out beyond the band and lift the
    // diagonal to restore positive definiteness
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            if (std::abs(i - j) > bw) a(i, j) = 0.0;
    a += Eigen::MatrixXd::Identity(d, d) * (1.0 + a.cwiseAbs().rowwise().sum().maxCoeff());
    return a;
}

}  // namespace

TEST_CASE("banded Cholesky solves agree with dense LDLT") {
    Rng rng(1234);
    for (int trial = 0; trial < 30; ++trial) {
        const int d = 2 + static_cast<int>(rng.uniform01() * 18);
        const int bw = static_cast<int>(rng.uniform01() * std::min(5, d - 1));
        const Eigen::MatrixXd a = random_banded_spd(d, bw, rng);
        BandSym m(d, bw);
        m.add_scaled(a, 1.0);
        REQUIRE(m.factorize());
        Eigen::VectorXd rhs(d);
        for (int i = 0; i < d; ++i) rhs[i] = rng.normal();
        const Eigen::VectorXd x = m.solve(rhs);
        const Eigen::VectorXd ref = Eigen::LDLT<Eigen::MatrixXd>(a).solve(rhs);
        CHECK((x - ref).lpNorm<Eigen::Infinity>() <
              1e-10 * std::max(1.0, ref.lpNorm<Eigen::Infinity>()));
    }
}

TEST_CASE("factorize reports indefinite and rank-deficient matrices") {
    BandSym m(3, 1);
    m.add(0, 0, 1.0);
    m.add(1, 1, -2.0);
    m.add(2, 2, 1.0);
    CHECK_FALSE(m.factorize());

    BandSym z(4, 2);
    z.add(0, 0, 1.0);  // remaining diagonal zero
    CHECK_FALSE(z.factorize());
}

TEST_CASE("diagonal-only band matrix works") {
    BandSym m(5, 0);
    for (int i = 0; i < 5; ++i) m.add(i, i, 2.0 + i);
    REQUIRE(m.factorize());
    Eigen::VectorXd rhs = Eigen::VectorXd::Ones(5);
    const Eigen::VectorXd x = m.solve(rhs);
    for (int i = 0; i < 5; ++i) CHECK(x[i] == doctest::Approx(1.0 / (2.0 + i)).epsilon(1e-14));
}

TEST_CASE("entry access is symmetric") {
    BandSym m(4, 2);
    m.add(2, 0, 3.5);
    CHECK(m.entry(0, 2) == 3.5);
    CHECK(m.dense()(0, 2) == 3.5);
    CHECK(m.dense()(2, 0) == 3.5);
}
