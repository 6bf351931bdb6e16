#pragma once

#include <cstdint>

namespace tnss {

/// splitmix64 finalizer; spreads nearby inputs across the word.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derive an independent stream seed from a base seed and a stream index.
/// Sequential indices give decorrelated streams, so callers can hand out
/// per-sample or per-restart seeds without coordinating.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    return splitmix64(base ^ splitmix64(stream + 1));
}

}  // namespace tnss
