#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace dgc {

/// Stateless 64-bit mixer (SplitMix64 finalizer).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// FNV-1a over a name; used to derive a stream id per operation.
constexpr std::uint64_t stream_id(std::string_view name) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : name) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Counter-based generator. The i-th output depends only on (seed, stream,
/// substream, i), so any consumer can reconstruct a draw without replaying
/// the sequence, and results do not depend on the standard library's
/// distribution implementations.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream = 0) noexcept
        : key_(mix64(mix64(seed ^ mix64(stream)) ^ mix64(substream + 0x632be59bd9b4e019ULL))) {}

    CounterRng(std::uint64_t seed, std::string_view stream, std::uint64_t substream = 0) noexcept
        : CounterRng(seed, stream_id(stream), substream) {}

    std::uint64_t next_u64() noexcept { return mix64(key_ ^ mix64(counter_++)); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in (0, 1]; safe as a logarithm argument.
    double uniform_open_zero() noexcept { return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53; }

    /// Unbiased integer in [0, n); n must be positive.
    std::uint64_t below(std::uint64_t n) noexcept;

    /// Standard normal via Box-Muller (cosine branch only).
    double normal() noexcept;

    double normal(double mean, double stddev) noexcept { return mean + stddev * normal(); }

    std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

/// One uniform draw keyed by three integers; independent of call order.
double keyed_uniform(std::uint64_t seed, std::uint64_t a, std::uint64_t b) noexcept;

template <class T>
void shuffle(std::span<T> items, CounterRng& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.below(i));
        std::swap(items[i - 1], items[j]);
    }
}

/// k distinct indices from [0, n), in draw order (partial Fisher-Yates).
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, CounterRng& rng);

}  // namespace dgc
