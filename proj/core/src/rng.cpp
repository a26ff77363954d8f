#include "ppbt/rng.hpp"

#include "ppbt/error.hpp"

namespace ppbt {

Stream::Stream(const RngPolicy& policy, std::uint64_t replicate,
               std::uint32_t arm, std::uint32_t block) {
    std::uint64_t h = mix64(policy.master_seed);
    h = mix64(h ^ policy.domain);
    h = mix64(h ^ replicate);
    h = mix64(h ^ ((static_cast<std::uint64_t>(arm) << 32) | block));
    state_ = h;
}

int generate_block(double rate, int block_size, Stream& stream) {
    if (!(rate >= 0.0 && rate <= 1.0)) {
        throw ConfigError("generate_block: rate outside [0, 1]");
    }
    if (block_size < 0) {
        throw ConfigError("generate_block: negative block size");
    }
    int responses = 0;
    for (int i = 0; i < block_size; ++i) {
        if (stream.uniform() < rate) ++responses;
    }
    return responses;
}

}  // namespace ppbt
