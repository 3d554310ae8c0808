#pragma once

// Portable seeded sampling. Every draw goes through SplitMix64 and an
// unbiased rejection step, so results are identical on every platform and
// standard library (std::uniform_int_distribution is not).

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace turnkit::random {

class SplitMix64 {
public:
    explicit SplitMix64(uint64_t seed) : state_(seed) {}

    uint64_t next() {
        uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform integer in [0, bound). bound must be > 0.
    uint64_t below(uint64_t bound) {
        const uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            const uint64_t r = next();
            if (r >= threshold) return r % bound;
        }
    }

private:
    uint64_t state_;
};

inline uint64_t mix(uint64_t x) { return SplitMix64(x).next(); }

/// Seed of the independent sub-stream owned by `key` (e.g. a turn-count bin).
inline uint64_t substream_seed(uint64_t seed, uint64_t key) {
    return mix(seed ^ mix(key + 0x632BE59BD9B4E019ULL));
}

/// Draws `count` elements without replacement using a partial Fisher-Yates
/// shuffle. The returned order is the draw order.
template <typename T>
std::vector<T> sample_without_replacement(std::span<const T> population, size_t count,
                                          SplitMix64& rng) {
    std::vector<T> pool(population.begin(), population.end());
    if (count > pool.size()) count = pool.size();
    for (size_t i = 0; i < count; ++i) {
        const size_t j = i + static_cast<size_t>(rng.below(pool.size() - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(count);
    return pool;
}

}  // namespace turnkit::random
