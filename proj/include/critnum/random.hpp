#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

// Portable seeded randomness. std::mt19937_64 is fully specified by the
// standard; the standard distributions are not, so draws are done by hand.
namespace critnum {

using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Seed for the i-th independent stream derived from a user seed.
constexpr std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t i)
{
    return splitmix64(splitmix64(seed) ^ splitmix64(i + 0x632be59bd9b4e019ull));
}

inline Rng stream_rng(std::uint64_t seed, std::uint64_t i) { return Rng(stream_seed(seed, i)); }

/// Uniform integer in [0, n), n > 0, by rejection.
inline std::uint64_t uniform_below(Rng & rng, std::uint64_t n)
{
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t r;
    do
        r = rng();
    while (r >= limit);
    return r % n;
}

/// k distinct values from [lo, hi), ascending (partial Fisher-Yates).
inline std::vector<std::uint32_t> sample_distinct(Rng & rng, std::uint32_t lo, std::uint32_t hi, std::uint32_t k)
{
    std::vector<std::uint32_t> pool(hi - lo);
    for (std::uint32_t i = 0; i < pool.size(); ++i)
        pool[i] = lo + i;
    for (std::uint32_t i = 0; i < k; ++i)
    {
        const auto j = i + static_cast<std::uint32_t>(uniform_below(rng, pool.size() - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    std::sort(pool.begin(), pool.end());
    return pool;
}

} // namespace critnum
