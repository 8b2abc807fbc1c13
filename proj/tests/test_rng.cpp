#include <cmath>

#include "doctest.h"
#include "psqr/rng.hpp"

using namespace psqr;

TEST_CASE("philox 4x32-10 known-answer vector") {
    const auto out = Philox4x32::block({0u, 0u, 0u, 0u}, {0u, 0u});
    CHECK(out[0] == 0x6627e8d5u);
    CHECK(out[1] == 0xe169c58du);
    CHECK(out[2] == 0xbc57ac4cu);
    CHECK(out[3] == 0x9b00dbd8u);
}

TEST_CASE("streams are deterministic and distinct") {
    Rng a(42, 7), b(42, 7), c(42, 8), d(43, 7);
    bool same_c = true, same_d = true;
    for (int i = 0; i < 64; ++i) {
        const uint64_t va = a.next_u64();
        CHECK(va == b.next_u64());
        if (va != c.next_u64()) same_c = false;
        if (va != d.next_u64()) same_d = false;
    }
    CHECK_FALSE(same_c);
    CHECK_FALSE(same_d);
}

TEST_CASE("uniform draws live in [0,1) with the right mean") {
    Rng rng(11);
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform01();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        sum += u;
    }
    CHECK(std::abs(sum / n - 0.5) < 0.005);
}

TEST_CASE("derived variates match their distributions roughly") {
    Rng rng(17);
    const int n = 50000;
    double nsum = 0.0, nsq = 0.0, esum = 0.0;
    int cauchy_pos = 0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        nsum += z;
        nsq += z * z;
        esum += rng.exponential(2.0);
        if (rng.cauchy(0.0, 0.01) > 0.0) ++cauchy_pos;
    }
    CHECK(std::abs(nsum / n) < 0.02);
    CHECK(std::abs(nsq / n - 1.0) < 0.03);
    CHECK(std::abs(esum / n - 2.0) < 0.05);
    CHECK(std::abs(static_cast<double>(cauchy_pos) / n - 0.5) < 0.01);
}
