#pragma once

#include <array>
#include <cstdint>
#include <random>

namespace bhd {

using Engine = std::mt19937_64;

enum class Stream : std::uint64_t { signal = 1, local_oscillator = 2 };

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Engine for one (seed, stream, shard) triple. Distinct triples are hashed
// through splitmix64 into independent seed sequences.
inline Engine make_substream(std::uint64_t seed, Stream stream, std::uint64_t shard) {
  std::uint64_t state = seed;
  state ^= splitmix64(state) + static_cast<std::uint64_t>(stream) * 0xd1b54a32d192ed03ULL;
  state ^= splitmix64(state) + shard * 0x8cb92ba72f3d8dd7ULL;
  std::array<std::uint32_t, 8> words{};
  for (std::size_t i = 0; i < words.size(); i += 2) {
    const std::uint64_t v = splitmix64(state);
    words[i] = static_cast<std::uint32_t>(v);
    words[i + 1] = static_cast<std::uint32_t>(v >> 32);
  }
  std::seed_seq seq(words.begin(), words.end());
  return Engine(seq);
}

}  // namespace bhd
