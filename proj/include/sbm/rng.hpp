#pragma once

#include <cstdint>
#include <random>

#include <boost/random/exponential_distribution.hpp>
#include <boost/random/normal_distribution.hpp>

namespace sbm {

using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Generator for one block of paths. Streams separate independent estimators
/// inside one experiment (e.g. the two sides of an identity check).
inline Rng make_rng(std::uint64_t master_seed, std::uint64_t stream, std::uint64_t block) {
  const std::uint64_t s = splitmix64(splitmix64(splitmix64(master_seed) ^ stream) + block);
  std::seed_seq seq{std::uint32_t(s), std::uint32_t(s >> 32), std::uint32_t(stream), std::uint32_t(block)};
  return Rng(seq);
}

/// Uniform on the open interval (0, 1).
inline double uniform01(Rng& rng) { return (double(rng() >> 11) + 0.5) * 0x1.0p-53; }

inline double std_normal(Rng& rng) {
  boost::random::normal_distribution<double> dist;
  return dist(rng);
}

inline double std_exponential(Rng& rng) {
  boost::random::exponential_distribution<double> dist;
  return dist(rng);
}

}  // namespace sbm
