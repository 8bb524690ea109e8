#pragma once

#include <cstdint>
#include <random>

namespace zenometry {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Deterministic substream keyed by (seed, stream, index).
///
/// Each (stream, index) pair gets an independent engine, so work items can be
/// drawn in any order or concurrently and still reproduce sequential output.
class Substream {
  public:
    using engine_type = std::mt19937_64;

    Substream(std::uint64_t seed, std::uint64_t stream, std::uint64_t index)
        : engine_(mix64(mix64(mix64(seed) ^ stream) ^ index)) {}

    engine_type &engine() noexcept { return engine_; }

    std::int64_t poisson(double mean) {
        if (mean <= 0.0) return 0;
        return std::poisson_distribution<std::int64_t>(mean)(engine_);
    }

    std::int64_t binomial(std::int64_t trials, double p) {
        if (trials <= 0) return 0;
        return std::binomial_distribution<std::int64_t>(trials, p)(engine_);
    }

  private:
    engine_type engine_;
};

/// Stream tags so different consumers of one seed never share a substream.
namespace streams {
inline constexpr std::uint64_t fringe = 0x66726e67ULL;
inline constexpr std::uint64_t bootstrap = 0x62747370ULL;
} // namespace streams

} // namespace zenometry
