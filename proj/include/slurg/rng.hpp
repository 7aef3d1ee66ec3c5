#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <utility>

namespace slurg {

/// Seeded generator with a portable bounded draw. std::mt19937_64's output
/// sequence is fixed by the standard but the std distributions are not, so
/// every sampling decision goes through uniform_index().
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, n); n must be > 0.
    std::size_t uniform_index(std::size_t n) {
        const auto bound = static_cast<std::uint64_t>(n);
        const std::uint64_t threshold = (0 - bound) % bound;
        std::uint64_t x = engine_();
        while (x < threshold) x = engine_();
        return static_cast<std::size_t>(x % bound);
    }

    /// Fisher-Yates over [first, last).
    template <typename It>
    void shuffle(It first, It last) {
        const auto n = static_cast<std::size_t>(last - first);
        for (std::size_t i = n; i > 1; --i) {
            const std::size_t j = uniform_index(i);
            using std::swap;
            swap(first[i - 1], first[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace slurg
