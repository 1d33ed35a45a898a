#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace abmal {

/// Named random substream: every consumer of randomness derives its own engine
/// from (seed, name, index) so adding a consumer never shifts another's draws.
inline std::mt19937_64 substream(std::uint64_t seed, std::string_view name, std::uint64_t index = 0) {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a over the name
  for (unsigned char c : name) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

/// A 64-bit seed value drawn from a named substream.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view name, std::uint64_t index = 0) {
  auto eng = substream(seed, name, index);
  return eng();
}

}  // namespace abmal
