#pragma once

// Seed derivation for reproducible, thread-count independent streams.
// Every stream is a std::mt19937_64 seeded from
//   splitmix64(master ^ splitmix64(fnv1a(label) ^ splitmix64(index)))
// so distinct (label, index) pairs never share a generator.

#include <cstdint>
#include <random>
#include <string_view>

namespace qprad {

using Rng = std::mt19937_64;

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

constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view label,
                                    std::uint64_t index) {
  return splitmix64(master ^ splitmix64(fnv1a(label) ^ splitmix64(index)));
}

inline Rng make_rng(std::uint64_t master, std::string_view label, std::uint64_t index) {
  return Rng(derive_seed(master, label, index));
}

}  // namespace qprad
