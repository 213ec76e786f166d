#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "tensor.hpp"

namespace styleflow {

// SplitMix64 generator. Each call adds the golden-ratio increment
// 0x9E3779B97F4A7C15 to the state and mixes it with the multipliers
// 0xBF58476D1CE4E5B9 / 0x94D049BB133111EB (shifts 30, 27, 31).
// Uniforms take the top 53 bits; normals use Box-Muller on (1 - u1, u2),
// returning the cosine branch first and caching the sine branch.
//
// Single-owner: do not advance one instance from two threads.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();
  double uniform();  // [0, 1)
  double normal();

  std::uint64_t state() const noexcept { return state_; }

 private:
  std::uint64_t state_;
  std::optional<double> cached_normal_;
};

Tensor randn(SeededRng& rng, const Shape& shape, double stddev = 1.0);

// Mixes a component tag into a user seed so that one user seed can drive
// several independent streams.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag);

// FNV-1a, 64-bit.
std::uint64_t hash_string(std::string_view text);

}  // namespace styleflow
