#pragma once

#include <cstdint>

namespace ppbt {

/*
 * Master seed plus a stream domain. Distinct domains (evaluation replicates,
 * lower-bound calibration, ...) never share substreams.
 */
struct RngPolicy {
    std::uint64_t master_seed = 20230101;
    std::uint64_t domain = 0;

    friend bool operator==(const RngPolicy&, const RngPolicy&) = default;
};

namespace stream_domain {
inline constexpr std::uint64_t kEvaluation = 0;
inline constexpr std::uint64_t kLowerBound = 1;
}  // namespace stream_domain

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/*
 * Counter-based substream. The starting state is a hash of
 * (master_seed, domain, replicate, arm, block), so a substream's draws do not
 * depend on how many other substreams were consumed, or in which order.
 */
class Stream {
   public:
    Stream(const RngPolicy& policy, std::uint64_t replicate, std::uint32_t arm,
           std::uint32_t block);

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

   private:
    std::uint64_t state_;
};

/// Binomial(block_size, rate) by per-patient Bernoulli inversion.
int generate_block(double rate, int block_size, Stream& stream);

}  // namespace ppbt
