#include "psqr/rng.hpp"

#include <cmath>

#include "psqr/stats.hpp"

namespace psqr {

namespace {
constexpr uint32_t kMult0 = 0xD2511F53u;
constexpr uint32_t kMult1 = 0xCD9E8D57u;
constexpr uint32_t kWeyl0 = 0x9E3779B9u;
constexpr uint32_t kWeyl1 = 0xBB67AE85u;

inline void philox_round(std::array<uint32_t, 4>& c, const std::array<uint32_t, 2>& k) {
    const uint64_t p0 = static_cast<uint64_t>(kMult0) * c[0];
    const uint64_t p1 = static_cast<uint64_t>(kMult1) * c[2];
    const uint32_t hi0 = static_cast<uint32_t>(p0 >> 32);
    const uint32_t lo0 = static_cast<uint32_t>(p0);
    const uint32_t hi1 = static_cast<uint32_t>(p1 >> 32);
    const uint32_t lo1 = static_cast<uint32_t>(p1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}
}  // namespace

std::array<uint32_t, 4> Philox4x32::block(std::array<uint32_t, 4> counter,
                                          std::array<uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        philox_round(counter, key);
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return counter;
}

Rng::Rng(uint64_t seed, uint64_t stream)
    : key_{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32)}, stream_(stream) {}

void Rng::refill() {
    const std::array<uint32_t, 4> ctr = {
        static_cast<uint32_t>(counter_), static_cast<uint32_t>(counter_ >> 32),
        static_cast<uint32_t>(stream_), static_cast<uint32_t>(stream_ >> 32)};
    buffer_ = Philox4x32::block(ctr, key_);
    ++counter_;
    available_ = 4;
}

uint64_t Rng::next_u64() {
    if (available_ < 2) refill();
    const uint32_t lo = buffer_[static_cast<size_t>(4 - available_)];
    const uint32_t hi = buffer_[static_cast<size_t>(5 - available_)];
    available_ -= 2;
    return (static_cast<uint64_t>(hi) << 32) | lo;
}

double Rng::uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::uniform_open01() {
    return (static_cast<double>(next_u64() >> 12) + 0.5) * 0x1.0p-52;
}

double Rng::normal(double mean, double sd) {
    return mean + sd * normal_quantile(uniform_open01());
}

double Rng::exponential(double mean) { return -mean * std::log(uniform_open01()); }

double Rng::cauchy(double location, double scale) {
    return location + scale * std::tan(M_PI * (uniform_open01() - 0.5));
}

}  // namespace psqr
