#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace agentlab {

// Uniform double in [0,1) from the top 53 bits of the engine output.
// std::uniform_real_distribution is implementation-defined, this is not,
// so seeded runs reproduce bit-exactly across standard libraries.
inline double uniform01(std::mt19937_64& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

// Standard normal via Box-Muller, again avoiding library distributions.
inline double standard_normal(std::mt19937_64& eng) {
  double u1 = uniform01(eng);
  double u2 = uniform01(eng);
  while (u1 <= 0.0) u1 = uniform01(eng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_mix(std::uint64_t a, std::uint64_t b) {
  return splitmix64(a ^ splitmix64(b));
}

}  // namespace agentlab
