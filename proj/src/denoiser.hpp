#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "attention.hpp"
#include "tensor.hpp"

namespace styleflow {

struct ArchitectureConfig {
  int down_blocks = 2;
  int mid_blocks = 1;
  int up_blocks = 6;
  std::size_t width = 64;
  std::size_t heads = 4;
  std::size_t latent_channels = 48;
  std::size_t context_dim = 32;
  std::size_t mlp_hidden = 128;

  void validate() const;
  bool has_block(const BlockId& block) const;
  // Forward order: down1.., mid1.., up1..
  std::vector<BlockId> block_order() const;
};

struct SelfAttentionWeights {
  Tensor wq, wk, wv, wo;  // [d x d]
};

struct CrossAttentionWeights {
  Tensor wq;                 // [d x d]
  Tensor text_k, text_v;     // [d_c x d]
  Tensor image_k, image_v;   // [d_c x d], shared by content and style streams
  Tensor wo;                 // [d x d]
};

struct BlockWeights {
  BlockId id;
  SelfAttentionWeights self;
  CrossAttentionWeights cross;
  Tensor mlp_in;   // [d x hidden]
  Tensor mlp_out;  // [hidden x d]
};

// Seeded, frozen weights. Equal (arch, seed) gives bit-identical weights.
struct DenoiserWeights {
  ArchitectureConfig arch;
  std::uint64_t seed = 0;
  Tensor embed_in;   // [C x d]
  Tensor embed_out;  // [d x C]
  std::vector<BlockWeights> blocks;

  static DenoiserWeights make(const ArchitectureConfig& arch, std::uint64_t seed);
};

// eps_theta(x_t, t, c).
class NoisePredictor {
 public:
  virtual ~NoisePredictor() = default;
  virtual Tensor predict_noise(const Tensor& x, int timestep, const ContextBundle& ctx,
                               const HookList& hooks) const = 0;
};

// Transformer stack over latent tokens: each block runs self-attention
// (hooks consulted), dual-feature cross-attention and an MLP, each as a
// pre-normalised residual branch. Content image tokens enter the last down
// block, style image tokens the first up block, text tokens every block.
class ToyDenoiser final : public NoisePredictor {
 public:
  explicit ToyDenoiser(DenoiserWeights weights);

  Tensor predict_noise(const Tensor& x, int timestep, const ContextBundle& ctx,
                       const HookList& hooks) const override;

  const DenoiserWeights& weights() const noexcept { return weights_; }

 private:
  DenoiserWeights weights_;
  BlockId content_block_;
  BlockId style_block_;
};

// eps = A vec(x) with ||A||_2 == rho. A is assembled as
// rho * H1 H2 diag(s) H3 H4 with Householder reflections H and max|s| == 1,
// so the spectral norm is exact by construction.
struct LinearDenoiserWeights {
  Tensor a;  // [D x D]
  double rho = 0.5;
  std::uint64_t seed = 0;

  static LinearDenoiserWeights make(std::size_t dim, std::uint64_t seed, double rho = 0.5);
};

// Ignores timestep, context and hooks.
class LinearDenoiser final : public NoisePredictor {
 public:
  explicit LinearDenoiser(LinearDenoiserWeights weights);

  Tensor predict_noise(const Tensor& x, int timestep, const ContextBundle& ctx,
                       const HookList& hooks) const override;

  const LinearDenoiserWeights& weights() const noexcept { return weights_; }

 private:
  LinearDenoiserWeights weights_;
};

// eps_uncond + s * (eps_cond - eps_uncond)
Tensor cfg_combine(const Tensor& eps_uncond, const Tensor& eps_cond, double guidance_scale);

// Deterministic stand-in for a text encoder: the prompt's FNV-1a hash seeds
// a Gaussian [tokens x dim] draw.
Tensor text_tokens(std::string_view prompt, std::size_t tokens = 8, std::size_t dim = 32);

// Sinusoidal embedding of an integer timestep, [d].
Tensor time_embedding(int timestep, std::size_t width);

// Row-wise standardisation without affine parameters.
Tensor layer_norm(const Tensor& h);

// Spectral norm estimate by power iteration on A^T A.
double spectral_norm_estimate(const Tensor& a, int iterations = 500,
                              std::uint64_t seed = 0x5EED);

}  // namespace styleflow
