#pragma once

#include <cstdint>
#include <string_view>

namespace photon_lattice {

// Counter-based random streams. Every draw is a pure function of
// (key, counter), so results never depend on which worker ran a task or in
// what order tasks completed.

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : text) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Stream key for the index-th task of a family, e.g. derive_key(seed, "real", 3).
constexpr std::uint64_t derive_key(std::uint64_t master_seed, std::string_view tag, std::uint64_t index) {
    return splitmix64(splitmix64(master_seed ^ fnv1a(tag)) + index);
}

class CounterStream {
public:
    explicit constexpr CounterStream(std::uint64_t key) : key_(key) {}

    constexpr std::uint64_t bits(std::uint64_t counter) const { return splitmix64(key_ ^ splitmix64(counter)); }

    /// Uniform in [0, 1) with 53 random bits.
    constexpr double uniform(std::uint64_t counter) const {
        return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
    }

    constexpr std::uint64_t key() const { return key_; }

private:
    std::uint64_t key_;
};

}  // namespace photon_lattice
