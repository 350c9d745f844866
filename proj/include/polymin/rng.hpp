#pragma once

#include <array>
#include <cstdint>

namespace polymin {

/// SplitMix64, used to expand a 64-bit seed into generator state.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t Next();

 private:
  std::uint64_t state_;
};

/// xoshiro256** seeded from SplitMix64. Only integer operations touch the
/// state, so streams are identical across platforms.
class Xoshiro256 {
 public:
  explicit Xoshiro256(std::uint64_t seed);
  std::uint64_t Next();
  /// Uniform on [0, 1) from the top 53 bits.
  double Uniform01();
  /// Uniform on the open interval (-1, 1); draws of exactly -1 are redrawn.
  double UniformSigned();
  /// Standard normal by the Box-Muller transform (cosine branch only).
  double Normal();

 private:
  std::array<std::uint64_t, 4> s_{};
};

/// Seed of the index-th independent substream of `seed`.
std::uint64_t SubstreamSeed(std::uint64_t seed, std::uint64_t index);

}  // namespace polymin
