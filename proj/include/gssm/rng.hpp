#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace gssm {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; a bijective mixer on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Derives an independent stream seed from a master seed and a path of
/// stream indices, e.g. derive_seed(master, {replication, instance}).
/// The result depends only on its arguments, never on scheduling order.
constexpr std::uint64_t derive_seed(std::uint64_t master,
                                    std::initializer_list<std::uint64_t> path) noexcept {
    std::uint64_t s = mix64(master);
    for (auto idx : path) s = mix64(s ^ mix64(idx + 0x632be59bd9b4e019ULL));
    return s;
}

inline Rng make_rng(std::uint64_t master, std::initializer_list<std::uint64_t> path = {}) {
    return Rng{derive_seed(master, path)};
}

}  // namespace gssm
