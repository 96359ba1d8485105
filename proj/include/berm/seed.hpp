#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace berm {

using Rng = std::mt19937_64;

// Stable seed derivation. Child seeds are a pure function of the parent seed
// and the key, so a cell's random stream never depends on scheduling or on
// which other cells exist.
//
//   derive_seed(s, k)   = splitmix64(s ^ splitmix64(k + 0x9e3779b97f4a7c15))
//   derive_seed(s, str) = derive_seed(s, fnv1a64(str))
namespace seed {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace seed

constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t key) noexcept {
    return seed::splitmix64(parent ^ seed::splitmix64(key + 0x9e3779b97f4a7c15ULL));
}

constexpr std::uint64_t derive_seed(std::uint64_t parent, std::string_view key) noexcept {
    return derive_seed(parent, seed::fnv1a64(key));
}

inline Rng make_rng(std::uint64_t s) { return Rng(s); }

// Distribution helpers written out here instead of using <random>'s
// distributions, whose algorithms differ between standard libraries.

// Uniform on [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) noexcept {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double low, double high) noexcept {
    return low + (high - low) * uniform01(rng);
}

// Uniform integer in [0, bound). Modulo bias is below 2^-40 for the bounds used here.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t bound) noexcept {
    return rng() % bound;
}

// Box-Muller standard normal; caches the second variate.
class StandardNormal {
public:
    double operator()(Rng& rng) noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform01(rng);
        while (u1 <= 0.0) u1 = uniform01(rng);
        const double u2 = uniform01(rng);
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 6.283185307179586476925 * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// In-place Fisher-Yates shuffle.
template <class T>
void shuffle(std::vector<T>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(uniform_index(rng, i));
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace berm
