#ifndef NFATK_RNG_HPP
#define NFATK_RNG_HPP

#include <cstdint>
#include <initializer_list>

namespace nfatk {

/// Deterministic 64-bit random stream (splitmix64).
///
/// All randomness in the library flows through this generator so that a run
/// is reproducible from a single 64-bit seed, independent of platform and of
/// thread schedule. Sub-streams for parallel work are derived with derive(),
/// which folds a path of integers (layer, state, slot, ...) into the seed;
/// two distinct paths yield statistically independent streams.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : state_(seed) {}

    /// Next 64 uniform bits.
    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform integer in [0, bound). bound must be > 0.
    std::uint64_t uniform_below_u64(std::uint64_t bound);

    /// Stream for the sub-task identified by `path`, derived from `seed`.
    static RandomStream derive(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
        std::uint64_t s = seed;
        for (std::uint64_t p : path) {
            s ^= p + 0x9e3779b97f4a7c15ULL + (s << 6) + (s >> 2);
            RandomStream mix(s);
            s = mix.next_u64();
        }
        return RandomStream(s);
    }

private:
    std::uint64_t state_;
};

} // namespace nfatk

#endif
