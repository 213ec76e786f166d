#include "rng.hpp"

#include <cmath>
#include <numbers>

namespace styleflow {

std::uint64_t SeededRng::next_u64() {
  state_ += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double SeededRng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double SeededRng::normal() {
  if (cached_normal_) {
    const double v = *cached_normal_;
    cached_normal_.reset();
    return v;
  }
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  cached_normal_ = r * std::sin(theta);
  return r * std::cos(theta);
}

Tensor randn(SeededRng& rng, const Shape& shape, double stddev) {
  Tensor out(shape);
  for (double& v : out.data()) v = stddev * rng.normal();
  return out;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  SeededRng mix(seed ^ (tag * 0xD6E8FEB86659FD93ULL));
  return mix.next_u64();
}

std::uint64_t hash_string(std::string_view text) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace styleflow
