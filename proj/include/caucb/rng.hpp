#ifndef CAUCB_RNG_HPP
#define CAUCB_RNG_HPP

#include <cstdint>
#include <random>
#include <string_view>

namespace caucb {

using Rng = std::mt19937_64;

// SplitMix64 finalizer. Used to turn (seed, stream index) pairs into
// well-separated engine seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent stream `stream` of master seed `seed`.
inline Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
  return Rng(splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL)));
}

// 64-bit FNV-1a; stable across platforms unlike std::hash.
constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Uniform double in the open interval (0, 1).
inline double uniform_open(Rng& rng) {
  // 53 random bits, offset by half an ulp so neither endpoint is reachable.
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

inline bool bernoulli(Rng& rng, double p) { return p > 0.0 && uniform_open(rng) < p; }

inline int uniform_index(Rng& rng, int n) {
  return static_cast<int>(std::uniform_int_distribution<int>(0, n - 1)(rng));
}

}  // namespace caucb

#endif  // CAUCB_RNG_HPP
