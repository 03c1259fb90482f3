#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace lgf {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace detail

// Seeded generator with explicit double conversion so draws are identical
// across standard libraries (std distributions are implementation-defined).
// Named substreams keep draw order in one component independent of another.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(detail::splitmix64(seed)) {}

    Rng derive(std::string_view label) const {
        return Rng(detail::splitmix64(seed_ ^ detail::fnv1a(label)));
    }
    Rng derive(std::string_view label, std::uint64_t index) const {
        return Rng(detail::splitmix64(seed_ ^ detail::fnv1a(label) ^ (index * 0x9e3779b97f4a7c15ULL)));
    }

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Unbiased integer in [0, n) by rejection.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % n;
        std::uint64_t r;
        do {
            r = next_u64();
        } while (r >= limit);
        return r % n;
    }

    int uniform_int(int lo, int hi) {  // inclusive bounds
        return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    // Standard normal via Box-Muller (spare cached).
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace lgf
