#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace tarraq {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer, used to decorrelate derived seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// FNV-1a over a byte string.
constexpr std::uint64_t fnv1a(std::string_view s)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s)
    {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Independent sub-stream of a replication seed.
enum class Stream : std::uint64_t
{
    mobility = 1,
    traffic = 2,
    channel = 3,
    protocol = 4,
};

inline Rng make_rng(std::uint64_t seed, Stream stream)
{
    return Rng{splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(stream)))};
}

inline double uniform(Rng &rng, double lo, double hi)
{
    return std::uniform_real_distribution<double>{lo, hi}(rng);
}

} // namespace tarraq
