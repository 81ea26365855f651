#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace steiner {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(splitmix64(seed) ^ (stream * 0xd1b54a32d192ed03ULL));
}

// Distribution helpers with a fixed algorithm; std:: distributions are not
// specified bit-for-bit across standard libraries.
inline std::uint64_t uniform_u64(Rng& rng, std::uint64_t bound) {  // [0, bound)
    if (bound <= 1) return 0;
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t x;
    do x = rng(); while (x >= limit);
    return x % bound;
}

inline std::int64_t uniform_int(Rng& rng, std::int64_t lo, std::int64_t hi) {  // [lo, hi]
    return lo + static_cast<std::int64_t>(uniform_u64(rng, static_cast<std::uint64_t>(hi - lo) + 1));
}

inline double uniform_real(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

template <class T>
void shuffle_in_place(std::vector<T>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = uniform_u64(rng, i);
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace steiner
