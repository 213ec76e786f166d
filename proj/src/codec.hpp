#pragma once

#include <cstdint>

#include "tensor.hpp"

namespace styleflow {

// Orthogonal patch codec standing in for a learned VAE: every p x p x 3
// patch is flattened (channel-major, then row, then column) and multiplied
// by a fixed orthogonal matrix. The map is linear, bias-free and exactly
// invertible.
struct CodecWeights {
  std::size_t patch_size = 4;
  Tensor proj;  // [3p^2 x 3p^2], orthogonal
  std::uint64_t seed = 0;

  static CodecWeights make(std::uint64_t seed, std::size_t patch_size = 4);

  std::size_t latent_channels() const { return 3 * patch_size * patch_size; }
};

// Rows of a seeded Gaussian matrix orthonormalised with modified Gram-Schmidt.
Tensor random_orthogonal(std::uint64_t seed, std::size_t n);

// img: [3 x H x W] with values in [0, 1]; returns [3p^2 x H/p x W/p].
Tensor encode(const Tensor& img, const CodecWeights& w);

// z: [3p^2 x h x w]; returns [3 x hp x wp] rescaled to [0, 1]. Clamping can
// be disabled to inspect the exact inverse.
Tensor decode(const Tensor& z, const CodecWeights& w, bool clamp = true);

}  // namespace styleflow
