#pragma once

// Counter-based randomness. Every random draw in the toolkit is a pure
// function of (seed, stable element id, ...), so results never depend on
// partitioning or thread scheduling.

#include <cstdint>
#include <initializer_list>

namespace gsample {

// splitmix64 finalizer
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t seed,
                                     std::initializer_list<std::uint64_t> words) noexcept {
  std::uint64_t h = mix64(seed);
  for (std::uint64_t w : words) h = mix64(h ^ mix64(w));
  return h;
}

// Maps a hash to (0, 1]. Zero is excluded so that a keep threshold of 0
// rejects everything and a threshold of 1 accepts everything.
constexpr double to_unit_open_closed(std::uint64_t h) noexcept {
  return static_cast<double>((h >> 11) + 1) * 0x1.0p-53;
}

// Maps a hash to [0, 1).
constexpr double to_unit_closed_open(std::uint64_t h) noexcept {
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, bound) via the multiply-shift reduction; bound > 0.
inline std::uint64_t to_bounded(std::uint64_t h, std::uint64_t bound) noexcept {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(h) * bound) >> 64);
}

constexpr double unit_hash(std::uint64_t seed, std::uint64_t id) noexcept {
  return to_unit_open_closed(hash_combine(seed, {id}));
}

}  // namespace gsample
