#pragma once

#include <array>
#include <cstdint>

namespace psqr {

// Philox 4x32 with 10 rounds (Salmon, Moraes, Dror & Shaw 2011): a counter
// based generator, so independent substreams come from distinct counters
// under one key and repetitions can be replayed or run in parallel.
struct Philox4x32 {
    static std::array<uint32_t, 4> block(std::array<uint32_t, 4> counter,
                                         std::array<uint32_t, 2> key);
};

// One substream of uniforms and derived variates: key = seed, counter high
// words = stream id, counter low words increment per block.
class Rng {
public:
    explicit Rng(uint64_t seed, uint64_t stream = 0);

    uint64_t next_u64();
    double uniform01();       // [0, 1), 53-bit resolution
    double uniform_open01();  // (0, 1)
    double normal(double mean = 0.0, double sd = 1.0);
    double exponential(double mean);
    double cauchy(double location, double scale);

private:
    std::array<uint32_t, 2> key_;
    uint64_t stream_;
    uint64_t counter_ = 0;
    std::array<uint32_t, 4> buffer_{};
    int available_ = 0;  // unread 32-bit words in buffer_
    void refill();
};

}  // namespace psqr
