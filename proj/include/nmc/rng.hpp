#pragma once

#include <cmath>
#include <cstdint>

namespace nmc {

// Counter-free reproducible stream: xoshiro256++ seeded through splitmix64
// from (seed, stream_index). Identical (seed, stream_index) reproduce the
// same draws on every platform; distinct stream indices give statistically
// independent streams.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_index = 0)
        : seed_(seed), stream_(stream_index)
    {
        std::uint64_t sm = seed ^ (0x9E3779B97F4A7C15ULL * (stream_index + 1));
        for (auto& word : state_) word = splitmix64(sm);
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_index() const { return stream_; }

    std::uint64_t next_u64()
    {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform on [0,1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform on (0,1).
    double uniform01_open()
    {
        double u;
        do {
            u = uniform01();
        } while (u == 0.0);
        return u;
    }

    // Exp(1) by inversion.
    double exponential() { return -std::log(uniform01_open()); }

    bool bernoulli(double p) { return uniform01() < p; }

private:
    static std::uint64_t rotl(std::uint64_t x, int k)
    {
        return (x << k) | (x >> (64 - k));
    }

    static std::uint64_t splitmix64(std::uint64_t& s)
    {
        std::uint64_t z = (s += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t state_[4];
};

} // namespace nmc
