#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace cqed {

/// SplitMix64 finaliser.
inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Purpose tags for independent substreams of one master seed.
enum class StreamPurpose : std::uint64_t {
    physics = 1,
    background = 2,
    detector = 3,
    dark = 4,
};

/// Substream seed: splitmix64(splitmix64(master ^ purpose * 2^56) ^ chunk).
/// Every chunk of work draws from its own generator, so results do not depend
/// on how chunks are scheduled over threads.
inline std::uint64_t substream_seed(std::uint64_t master, StreamPurpose purpose, std::uint64_t chunk)
{
    const std::uint64_t tagged = master ^ (static_cast<std::uint64_t>(purpose) << 56);
    return splitmix64(splitmix64(tagged) ^ chunk);
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t master, StreamPurpose purpose, std::uint64_t chunk)
{
    return Rng(substream_seed(master, purpose, chunk));
}

/// Uniform in (0, 1), never exactly 0.
inline double uniform_open(Rng& rng)
{
    constexpr double scale = 1.0 / 9007199254740992.0;  // 2^-53
    return (static_cast<double>(rng() >> 11) + 0.5) * scale;
}

}  // namespace cqed

namespace cqed {

/// Distribution helpers written out so streams are bit-identical across
/// standard library implementations.
inline double exponential(Rng& rng, double rate)
{
    return -std::log(uniform_open(rng)) / rate;
}

inline double standard_normal(Rng& rng)
{
    const double u1 = uniform_open(rng);
    const double u2 = uniform_open(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

/// Poisson by sequential inversion; fine for the small means used here.
inline long poisson(Rng& rng, double mean)
{
    if (mean <= 0.0)
        return 0;
    const double u = uniform_open(rng);
    double p = std::exp(-mean);
    double cdf = p;
    long k = 0;
    while (u > cdf && k < 100000) {
        ++k;
        p *= mean / static_cast<double>(k);
        cdf += p;
        if (p < 1e-300 && cdf < u)
            break;
    }
    return k;
}

}  // namespace cqed
