#ifndef QDGRASP_RNG_HPP
#define QDGRASP_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>

namespace qdgrasp {

/// SplitMix64 finalizer; a good 64-bit mixing function.
constexpr std::uint64_t mix64(std::uint64_t z)
{
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Derives an independent key from a parent key and a stream index.
constexpr std::uint64_t derive_key(std::uint64_t key, std::uint64_t stream)
{
    return mix64(key ^ mix64(stream + 0x632BE59BD9B4E019ull));
}

/// Counter-based generator: the n-th draw is a pure function of (key, n), so
/// a stream can be split or replayed without carrying hidden state.
class CounterRng {
public:
    constexpr explicit CounterRng(std::uint64_t key = 0, std::uint64_t counter = 0) : key_(key), counter_(counter) {}

    constexpr std::uint64_t key() const { return key_; }
    constexpr std::uint64_t counter() const { return counter_; }

    constexpr std::uint64_t next_u64() { return mix64(key_ ^ mix64(counter_++)); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n); n > 0.
    std::uint64_t below(std::uint64_t n)
    {
        // Lemire's multiply-shift; the bias is < n / 2^64.
        return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    bool bernoulli(double p) { return uniform() < p; }

    /// Standard normal via Box-Muller; consumes exactly two draws.
    double gaussian()
    {
        double u1 = uniform();
        const double u2 = uniform();
        if (u1 <= 0.0)
            u1 = 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    double gaussian(double sigma) { return sigma * gaussian(); }

    /// Independent child stream.
    CounterRng split(std::uint64_t stream) const { return CounterRng(derive_key(key_, stream)); }

private:
    std::uint64_t key_;
    std::uint64_t counter_;
};

} // namespace qdgrasp

#endif
