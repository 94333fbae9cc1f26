#pragma once

#include <bit>
#include <cstdint>
#include <initializer_list>

namespace gdm {

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Order-sensitive combination of seed components.
constexpr std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = 0x6a09e667f3bcc908ULL;
  for (const auto p : parts) h = mix64(h ^ mix64(p));
  return h;
}

inline std::uint64_t seed_bits(double value) { return std::bit_cast<std::uint64_t>(value); }

}  // namespace gdm
