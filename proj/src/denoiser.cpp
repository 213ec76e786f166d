#include "denoiser.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"
#include "rng.hpp"
#include "style_control.hpp"

namespace styleflow {

void ArchitectureConfig::validate() const {
  if (width == 0 || heads == 0 || width % heads != 0) {
    fail(ErrorKind::parameter, "architecture: width " + std::to_string(width) +
                                   " must be positive and divisible by " +
                                   std::to_string(heads) + " heads");
  }
  if (down_blocks < 1 || mid_blocks < 0 || up_blocks < 1) {
    fail(ErrorKind::parameter, "architecture: needs at least one down and one up block");
  }
}

bool ArchitectureConfig::has_block(const BlockId& block) const {
  if (block.index < 1) return false;
  switch (block.path) {
    case BlockPath::down: return block.index <= down_blocks;
    case BlockPath::mid: return block.index <= mid_blocks;
    case BlockPath::up: return block.index <= up_blocks;
  }
  return false;
}

std::vector<BlockId> ArchitectureConfig::block_order() const {
  std::vector<BlockId> order;
  for (int i = 1; i <= down_blocks; ++i) order.push_back(BlockId::down(i));
  for (int i = 1; i <= mid_blocks; ++i) order.push_back(BlockId::mid(i));
  for (int i = 1; i <= up_blocks; ++i) order.push_back(BlockId::up(i));
  return order;
}

DenoiserWeights DenoiserWeights::make(const ArchitectureConfig& arch, std::uint64_t seed) {
  arch.validate();
  DenoiserWeights w;
  w.arch = arch;
  w.seed = seed;
  SeededRng rng(derive_seed(seed, 0xDE7015E));
  const std::size_t d = arch.width, c = arch.latent_channels, dc = arch.context_dim,
                    hidden = arch.mlp_hidden;
  auto gain = [](std::size_t fan_in) { return 1.0 / std::sqrt(static_cast<double>(fan_in)); };

  w.embed_in = randn(rng, {c, d}, gain(c));
  for (const BlockId& id : arch.block_order()) {
    BlockWeights b;
    b.id = id;
    b.self.wq = randn(rng, {d, d}, gain(d));
    b.self.wk = randn(rng, {d, d}, gain(d));
    b.self.wv = randn(rng, {d, d}, gain(d));
    b.self.wo = randn(rng, {d, d}, 0.5 * gain(d));
    b.cross.wq = randn(rng, {d, d}, gain(d));
    b.cross.text_k = randn(rng, {dc, d}, gain(dc));
    b.cross.text_v = randn(rng, {dc, d}, gain(dc));
    b.cross.image_k = randn(rng, {dc, d}, gain(dc));
    b.cross.image_v = randn(rng, {dc, d}, gain(dc));
    b.cross.wo = randn(rng, {d, d}, 0.5 * gain(d));
    b.mlp_in = randn(rng, {d, hidden}, gain(d));
    b.mlp_out = randn(rng, {hidden, d}, 0.5 * gain(hidden));
    w.blocks.push_back(std::move(b));
  }
  w.embed_out = randn(rng, {d, c}, gain(d));
  return w;
}

Tensor time_embedding(int timestep, std::size_t width) {
  Tensor out({width});
  const std::size_t half = width / 2;
  for (std::size_t i = 0; i < half; ++i) {
    const double freq = std::pow(1000.0, -static_cast<double>(i) / static_cast<double>(half));
    out[2 * i] = std::sin(timestep * freq);
    out[2 * i + 1] = std::cos(timestep * freq);
  }
  return out;
}

Tensor layer_norm(const Tensor& h) {
  const std::size_t rows = h.dim(0), cols = h.dim(1);
  Tensor out({rows, cols});
  for (std::size_t i = 0; i < rows; ++i) {
    double mean = 0.0;
    for (std::size_t j = 0; j < cols; ++j) mean += h.at(i, j);
    mean /= static_cast<double>(cols);
    double var = 0.0;
    for (std::size_t j = 0; j < cols; ++j) var += (h.at(i, j) - mean) * (h.at(i, j) - mean);
    const double inv = 1.0 / std::sqrt(var / static_cast<double>(cols) + 1e-5);
    for (std::size_t j = 0; j < cols; ++j) out.at(i, j) = (h.at(i, j) - mean) * inv;
  }
  return out;
}

namespace {

void gelu_inplace(Tensor& t) {
  constexpr double k = 0.7978845608028654;  // sqrt(2 / pi)
  for (double& v : t.data()) v = 0.5 * v * (1.0 + std::tanh(k * (v + 0.044715 * v * v * v)));
}

}  // namespace

ToyDenoiser::ToyDenoiser(DenoiserWeights weights)
    : weights_(std::move(weights)),
      content_block_(BlockId::down(weights_.arch.down_blocks)),
      style_block_(BlockId::up(1)) {}

Tensor ToyDenoiser::predict_noise(const Tensor& x, int timestep, const ContextBundle& ctx,
                                  const HookList& hooks) const {
  const ArchitectureConfig& arch = weights_.arch;
  if (x.rank() != 3 || x.dim(0) != arch.latent_channels) {
    fail(ErrorKind::dimension, "predict_noise: expected a [" +
                                   std::to_string(arch.latent_channels) +
                                   " x h x w] latent, got " + shape_string(x.shape()));
  }
  if (timestep < 0) fail(ErrorKind::parameter, "predict_noise: negative timestep");
  const std::size_t channels = x.dim(0), tokens = x.dim(1) * x.dim(2), d = arch.width;

  // [C x h x w] -> [L x C]
  Tensor tok({tokens, channels});
  for (std::size_t c = 0; c < channels; ++c)
    for (std::size_t i = 0; i < tokens; ++i) tok.at(i, c) = x[c * tokens + i];

  Tensor h = matmul(tok, weights_.embed_in);
  const Tensor temb = time_embedding(timestep, d);
  for (std::size_t i = 0; i < tokens; ++i)
    for (std::size_t j = 0; j < d; ++j) h.at(i, j) += temb[j];

  ContextBundle block_ctx;
  block_ctx.text_tokens = ctx.text_tokens;

  for (const BlockWeights& b : weights_.blocks) {
    {
      const Tensor n = layer_norm(h);
      const Tensor q = matmul(n, b.self.wq);
      Tensor k = matmul(n, b.self.wk);
      Tensor v = matmul(n, b.self.wv);
      for (AttentionHook* hook : hooks) {
        if (hook == nullptr || !hook->watches(b.id)) continue;
        std::optional<KvPair> replaced = hook->on_self_attention(b.id, timestep, q, k, v);
        if (!replaced) continue;
        if (replaced->key.shape() != k.shape() || replaced->value.shape() != v.shape()) {
          fail(ErrorKind::hook_contract,
               "hook at " + b.id.name() + " returned K " +
                   shape_string(replaced->key.shape()) + ", V " +
                   shape_string(replaced->value.shape()) + " for originals " +
                   shape_string(k.shape()) + ", " + shape_string(v.shape()));
        }
        k = std::move(replaced->key);
        v = std::move(replaced->value);
      }
      add_inplace(h, matmul(multi_head_attention(q, k, v, arch.heads), b.self.wo));
    }
    {
      const Tensor n = layer_norm(h);
      const Tensor q = matmul(n, b.cross.wq);
      block_ctx.content_tokens =
          b.id == content_block_ ? ctx.content_tokens : std::optional<Tensor>{};
      block_ctx.style_tokens = b.id == style_block_ ? ctx.style_tokens : std::optional<Tensor>{};
      add_inplace(h, matmul(dfca(q, block_ctx, b.cross, arch.heads), b.cross.wo));
    }
    {
      Tensor inner = matmul(layer_norm(h), b.mlp_in);
      gelu_inplace(inner);
      add_inplace(h, matmul(inner, b.mlp_out));
    }
  }

  const Tensor out_tok = matmul(layer_norm(h), weights_.embed_out);
  Tensor eps(x.shape());
  for (std::size_t c = 0; c < channels; ++c)
    for (std::size_t i = 0; i < tokens; ++i) eps[c * tokens + i] = out_tok.at(i, c);
  return eps;
}

LinearDenoiserWeights LinearDenoiserWeights::make(std::size_t dim, std::uint64_t seed,
                                                  double rho) {
  if (dim == 0 || !(rho > 0.0)) {
    fail(ErrorKind::parameter, "linear denoiser: dimension and rho must be positive");
  }
  SeededRng rng(derive_seed(seed, 0x11EA2));
  // Spectrum: one entry of magnitude exactly 1, the rest uniform in [-0.9, 0.9].
  std::vector<double> spectrum(dim);
  for (double& s : spectrum) s = 1.8 * rng.uniform() - 0.9;
  spectrum[rng.next_u64() % dim] = rng.uniform() < 0.5 ? -1.0 : 1.0;

  std::vector<std::vector<double>> reflectors(4, std::vector<double>(dim));
  for (auto& v : reflectors) {
    double norm = 0.0;
    for (double& e : v) {
      e = rng.normal();
      norm += e * e;
    }
    norm = std::sqrt(norm);
    for (double& e : v) e /= norm;
  }

  // M <- (I - 2 v v^T) M, applied on the left; M <- M (I - 2 v v^T) on the right.
  auto reflect_left = [dim](Tensor& m, const std::vector<double>& v) {
    std::vector<double> proj(dim, 0.0);
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = 0; j < dim; ++j) proj[j] += v[i] * m.at(i, j);
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = 0; j < dim; ++j) m.at(i, j) -= 2.0 * v[i] * proj[j];
  };
  auto reflect_right = [dim](Tensor& m, const std::vector<double>& v) {
    for (std::size_t i = 0; i < dim; ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < dim; ++j) dot += m.at(i, j) * v[j];
      for (std::size_t j = 0; j < dim; ++j) m.at(i, j) -= 2.0 * dot * v[j];
    }
  };

  Tensor a({dim, dim});
  for (std::size_t i = 0; i < dim; ++i) a.at(i, i) = rho * spectrum[i];
  reflect_left(a, reflectors[1]);
  reflect_left(a, reflectors[0]);
  reflect_right(a, reflectors[2]);
  reflect_right(a, reflectors[3]);

  LinearDenoiserWeights w;
  w.a = std::move(a);
  w.rho = rho;
  w.seed = seed;
  return w;
}

LinearDenoiser::LinearDenoiser(LinearDenoiserWeights weights) : weights_(std::move(weights)) {}

Tensor LinearDenoiser::predict_noise(const Tensor& x, int, const ContextBundle&,
                                     const HookList&) const {
  const std::size_t dim = weights_.a.dim(0);
  if (x.size() != dim) {
    fail(ErrorKind::dimension, "linear denoiser: latent " + shape_string(x.shape()) +
                                   " does not have " + std::to_string(dim) + " elements");
  }
  const Tensor column = x.reshaped({dim, 1});
  return matmul(weights_.a, column).reshaped(x.shape());
}

Tensor cfg_combine(const Tensor& eps_uncond, const Tensor& eps_cond, double guidance_scale) {
  require_same_shape(eps_uncond, eps_cond, "cfg_combine");
  if (guidance_scale == 1.0) return eps_cond;
  Tensor out = eps_uncond;
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] += guidance_scale * (eps_cond[i] - eps_uncond[i]);
  return out;
}

Tensor text_tokens(std::string_view prompt, std::size_t tokens, std::size_t dim) {
  SeededRng rng(hash_string(prompt));
  return randn(rng, {tokens, dim});
}

double spectral_norm_estimate(const Tensor& a, int iterations, std::uint64_t seed) {
  const std::size_t rows = a.dim(0), cols = a.dim(1);
  SeededRng rng(seed);
  Tensor v = randn(rng, {cols, 1});
  v = scale(v, 1.0 / l2_norm(v));
  double sigma = 0.0;
  for (int it = 0; it < iterations; ++it) {
    const Tensor av = matmul(a, v);
    Tensor atav({cols, 1});
    for (std::size_t j = 0; j < cols; ++j) {
      double acc = 0.0;
      for (std::size_t i = 0; i < rows; ++i) acc += a.at(i, j) * av[i];
      atav[j] = acc;
    }
    const double norm = l2_norm(atav);
    if (norm == 0.0) return 0.0;
    sigma = std::sqrt(norm);
    v = scale(atav, 1.0 / norm);
  }
  return sigma;
}

}  // namespace styleflow
