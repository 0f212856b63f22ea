#include "dgc/rng.hpp"

#include <cmath>
#include <numeric>
#include <numbers>

#include "dgc/error.hpp"

namespace dgc {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidSpec: return "InvalidSpec";
        case ErrorKind::DisconnectedGraph: return "DisconnectedGraph";
        case ErrorKind::RetriesExhausted: return "RetriesExhausted";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::NoConvergence: return "NoConvergence";
        case ErrorKind::NonFiniteState: return "NonFiniteState";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::EmptyFile: return "EmptyFile";
        case ErrorKind::RaggedRows: return "RaggedRows";
        case ErrorKind::TooFewPoints: return "TooFewPoints";
        case ErrorKind::LengthMismatch: return "LengthMismatch";
        case ErrorKind::EmptyInput: return "EmptyInput";
        case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

std::uint64_t CounterRng::below(std::uint64_t n) noexcept {
    // Lemire's multiply-shift with rejection.
    std::uint64_t x = next_u64();
    __uint128_t prod = static_cast<__uint128_t>(x) * n;
    auto low = static_cast<std::uint64_t>(prod);
    if (low < n) {
        const std::uint64_t threshold = (0 - n) % n;
        while (low < threshold) {
            x = next_u64();
            prod = static_cast<__uint128_t>(x) * n;
            low = static_cast<std::uint64_t>(prod);
        }
    }
    return static_cast<std::uint64_t>(prod >> 64);
}

double CounterRng::normal() noexcept {
    const double u1 = uniform_open_zero();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double keyed_uniform(std::uint64_t seed, std::uint64_t a, std::uint64_t b) noexcept {
    const std::uint64_t bits = mix64(mix64(mix64(seed) ^ a) ^ mix64(b ^ 0xd1b54a32d192ed03ULL));
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, CounterRng& rng) {
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    if (k > n) k = n;
    for (std::size_t i = 0; i < k; ++i) {
        const auto j = i + static_cast<std::size_t>(rng.below(n - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
}

}  // namespace dgc
