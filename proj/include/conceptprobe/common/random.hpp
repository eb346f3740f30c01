#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace conceptprobe {

/// SplitMix64 finalizer. Used for every seed derivation so that datasets are
/// reproducible on any platform.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Order-sensitive combination of seed components:
/// derive_seed(a, b, c) = mix64(mix64(mix64(a) ^ b) ^ c).
constexpr std::uint64_t derive_seed(std::uint64_t base) noexcept { return mix64(base); }

template <typename... Rest>
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t next, Rest... rest) noexcept {
    return derive_seed(mix64(base) ^ next, static_cast<std::uint64_t>(rest)...);
}

/// Portable random source. The engine is std::mt19937_64 (fully specified by
/// the standard); the distributions are implemented here because the
/// standard library's are not.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform integer in [lo, hi] (inclusive), rejection sampled.
    int uniform(int lo, int hi) {
        if (hi < lo) throw std::invalid_argument("Rng::uniform: empty range");
        const std::uint64_t span = static_cast<std::uint64_t>(static_cast<std::int64_t>(hi) - lo) + 1;
        const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % span);
        std::uint64_t r;
        do {
            r = engine_();
        } while (r >= limit);
        return lo + static_cast<int>(r % span);
    }

    std::size_t index(std::size_t n) {
        if (n == 0) throw std::invalid_argument("Rng::index: empty range");
        return static_cast<std::size_t>(uniform(0, static_cast<int>(n) - 1));
    }

    bool coin() { return (engine_() >> 63) != 0; }

    template <typename T>
    const T& pick(std::span<const T> items) {
        return items[index(items.size())];
    }
    template <typename T>
    const T& pick(const std::vector<T>& items) {
        return items[index(items.size())];
    }

    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::swap(items[i - 1], items[index(i)]);
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace conceptprobe
