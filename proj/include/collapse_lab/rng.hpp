// Deterministic PRNG for all Monte Carlo trials.
//
// Generator: xoshiro256** (Blackman & Vigna). Per-trial substreams are
// derived from (master_seed, trial_index) with splitmix64:
//
//     x    = master_seed + (trial_index + 1) * 0x9E3779B97F4A7C15   (mod 2^64)
//     s[i] = splitmix64(x),  i = 0..3   (advancing x each call)
//
// Doubles take the top 53 bits of the next output, coins the top bit.
// This scheme is part of the output contract: identical (master_seed,
// trial_index) reproduce bit-identical trajectories no matter how many
// trials run, in what order, or on how many threads.

#ifndef COLLAPSE_LAB_RNG_HPP
#define COLLAPSE_LAB_RNG_HPP

#include <array>
#include <cstdint>

namespace clab {

inline std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

class RngStream {
public:
    RngStream() : RngStream(0, 0) {}

    RngStream(std::uint64_t master_seed, std::uint64_t trial_index) {
        std::uint64_t x = master_seed + (trial_index + 1) * 0x9E3779B97F4A7C15ULL;
        for (auto& word : state_) word = splitmix64(x);
    }

    static RngStream for_trial(std::uint64_t master_seed, std::uint64_t trial_index) {
        return RngStream(master_seed, trial_index);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform in [0, 1), 53-bit resolution.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Fair coin.
    bool next_coin() { return (next_u64() >> 63) != 0; }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::array<std::uint64_t, 4> state_{};
};

}  // namespace clab

#endif
