#include "codec.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"
#include "rng.hpp"

namespace styleflow {

Tensor random_orthogonal(std::uint64_t seed, std::size_t n) {
  SeededRng rng(seed);
  Tensor q = randn(rng, {n, n});
  for (std::size_t i = 0; i < n; ++i) {
    double* row = q.data().data() + i * n;
    for (std::size_t j = 0; j < i; ++j) {
      const double* prev = q.data().data() + j * n;
      double dot = 0.0;
      for (std::size_t k = 0; k < n; ++k) dot += row[k] * prev[k];
      for (std::size_t k = 0; k < n; ++k) row[k] -= dot * prev[k];
    }
    double norm = 0.0;
    for (std::size_t k = 0; k < n; ++k) norm += row[k] * row[k];
    norm = std::sqrt(norm);
    if (norm < 1e-10) {
      fail(ErrorKind::parameter, "random_orthogonal: degenerate draw for seed " +
                                     std::to_string(seed));
    }
    for (std::size_t k = 0; k < n; ++k) row[k] /= norm;
  }
  return q;
}

CodecWeights CodecWeights::make(std::uint64_t seed, std::size_t patch_size) {
  if (patch_size == 0) fail(ErrorKind::parameter, "codec: patch size must be positive");
  CodecWeights w;
  w.patch_size = patch_size;
  w.seed = seed;
  w.proj = random_orthogonal(derive_seed(seed, 0xC0DEC), 3 * patch_size * patch_size);
  return w;
}

Tensor encode(const Tensor& img, const CodecWeights& w) {
  const std::size_t p = w.patch_size;
  if (img.rank() != 3 || img.dim(0) != 3) {
    fail(ErrorKind::dimension, "encode: expected a 3 x H x W image, got " +
                                   shape_string(img.shape()));
  }
  const std::size_t height = img.dim(1), width = img.dim(2);
  if (height == 0 || width == 0 || height % p != 0 || width % p != 0) {
    fail(ErrorKind::dimension, "encode: image " + shape_string(img.shape()) +
                                   " is not divisible by patch size " + std::to_string(p));
  }
  const std::size_t gh = height / p, gw = width / p, n = w.latent_channels();
  Tensor z({n, gh, gw});
  std::vector<double> patch(n);
  for (std::size_t gy = 0; gy < gh; ++gy) {
    for (std::size_t gx = 0; gx < gw; ++gx) {
      std::size_t m = 0;
      for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t dy = 0; dy < p; ++dy)
          for (std::size_t dx = 0; dx < p; ++dx)
            patch[m++] = 2.0 * img.at(c, gy * p + dy, gx * p + dx) - 1.0;
      for (std::size_t k = 0; k < n; ++k) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += w.proj.at(k, j) * patch[j];
        z.at(k, gy, gx) = acc;
      }
    }
  }
  return z;
}

Tensor decode(const Tensor& z, const CodecWeights& w, bool clamp) {
  const std::size_t p = w.patch_size, n = w.latent_channels();
  if (z.rank() != 3 || z.dim(0) != n) {
    fail(ErrorKind::dimension, "decode: expected " + std::to_string(n) +
                                   " latent channels, got " + shape_string(z.shape()));
  }
  const std::size_t gh = z.dim(1), gw = z.dim(2);
  Tensor img({3, gh * p, gw * p});
  std::vector<double> patch(n);
  for (std::size_t gy = 0; gy < gh; ++gy) {
    for (std::size_t gx = 0; gx < gw; ++gx) {
      for (std::size_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k) acc += w.proj.at(k, j) * z.at(k, gy, gx);
        patch[j] = acc;
      }
      std::size_t m = 0;
      for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t dy = 0; dy < p; ++dy)
          for (std::size_t dx = 0; dx < p; ++dx) {
            double v = 0.5 * (patch[m++] + 1.0);
            if (clamp) v = std::clamp(v, 0.0, 1.0);
            img.at(c, gy * p + dy, gx * p + dx) = v;
          }
    }
  }
  return img;
}

}  // namespace styleflow
