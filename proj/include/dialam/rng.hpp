#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

namespace dialam {

/// SplitMix64. Every seeded sampling step in the toolkit draws from this
/// generator so that sampled datasets are reproducible across platforms:
///
///   state += 0x9E3779B97F4A7C15
///   z = state
///   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///   return z ^ (z >> 31)
class SplitMix64
{
public:
    explicit SplitMix64(std::uint64_t seed) noexcept : m_state(seed) {}

    std::uint64_t next() noexcept
    {
        std::uint64_t z = (m_state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform integer in [0, bound). Rejection sampling: draws below
    /// (2^64 - bound) mod bound are discarded, the rest reduced mod bound.
    std::uint64_t below(std::uint64_t bound) noexcept
    {
        if (bound <= 1)
            return 0;
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            const std::uint64_t x = next();
            if (x >= threshold)
                return x % bound;
        }
    }

    /// Uniform double in [0, 1) from the top 53 bits.
    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    using result_type = std::uint64_t;
    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return ~result_type{0}; }
    result_type operator()() noexcept { return next(); }

private:
    std::uint64_t m_state;
};

/// Choose `k` of the indices [0, n) uniformly without replacement with a
/// partial Fisher-Yates pass: for i in [0, k) swap slot i with slot
/// i + below(n - i). The chosen indices are returned sorted ascending.
inline std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k, SplitMix64& rng)
{
    k = std::min(k, n);
    std::vector<std::size_t> slots(n);
    std::iota(slots.begin(), slots.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) {
        const auto j = i + static_cast<std::size_t>(rng.below(n - i));
        std::swap(slots[i], slots[j]);
    }
    slots.resize(k);
    std::sort(slots.begin(), slots.end());
    return slots;
}

/// In-place Fisher-Yates shuffle driven by `below`, from the last slot down.
template <typename T>
void shuffle(std::vector<T>& items, SplitMix64& rng)
{
    for (std::size_t i = items.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.below(i));
        std::swap(items[i - 1], items[j]);
    }
}

} // namespace dialam
