#pragma once

// Counter-based generator: the i-th output is a pure function of (seed, i), so
// any stream can be regenerated in another language from the seed alone.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <set>
#include <vector>

namespace ffil {

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Per-trial seed derivation used by every parallel experiment.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
    return seed ^ index;
}

class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit CounterRng(std::uint64_t seed) noexcept : seed_(seed) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        ++counter_;
        return mix64(seed_ + counter_ * 0x9E3779B97F4A7C15ULL);
    }

    /// Uniform integer in [0, bound); bound must be positive.
    std::uint64_t uniform_below(std::uint64_t bound) noexcept {
        // rejection on the top multiple of bound keeps the draw exactly uniform
        const std::uint64_t limit = max() - (max() % bound + 1) % bound;
        std::uint64_t x = (*this)();
        while (x > limit) x = (*this)();
        return x % bound;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    bool bernoulli(double q) noexcept { return uniform01() < q; }

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t draws() const noexcept { return counter_; }

private:
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
};

/// Sorted k-subset of [0, n), uniform over all such subsets (Floyd's algorithm).
inline std::vector<std::size_t> sample_subset(std::size_t n, std::size_t k, CounterRng& rng) {
    std::set<std::size_t> chosen;
    for (std::size_t j = n - k; j < n; ++j) {
        const auto t = static_cast<std::size_t>(rng.uniform_below(j + 1));
        if (!chosen.insert(t).second) chosen.insert(j);
    }
    return {chosen.begin(), chosen.end()};
}

template <typename T>
void shuffle(std::vector<T>& v, CounterRng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::swap(v[i - 1], v[rng.uniform_below(i)]);
    }
}

}  // namespace ffil
