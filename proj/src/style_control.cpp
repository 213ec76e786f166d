#include "style_control.hpp"

#include <cmath>

#include "errors.hpp"
#include "rng.hpp"

namespace styleflow {

void AttentionSnapshotStore::insert(const BlockId& block, int timestep, KvPair kv) {
  if (kv.key.rank() != 2 || kv.value.rank() != 2 || kv.key.dim(0) != kv.value.dim(0)) {
    fail(ErrorKind::dimension, "snapshot store: K " + shape_string(kv.key.shape()) +
                                   " and V " + shape_string(kv.value.shape()) +
                                   " disagree in token count");
  }
  auto [it, inserted] = entries_.emplace(Key{block, timestep}, std::move(kv));
  if (!inserted) {
    fail(ErrorKind::capture_conflict, "snapshot for (" + block.name() + ", t=" +
                                          std::to_string(timestep) + ") already captured");
  }
}

const KvPair* AttentionSnapshotStore::find(const BlockId& block, int timestep) const {
  auto it = entries_.find(Key{block, timestep});
  return it == entries_.end() ? nullptr : &it->second;
}

InjectionConfig InjectionConfig::default_blocks() {
  return InjectionConfig{{BlockId::up(5), BlockId::up(6)}};
}

void InjectionConfig::validate(const ArchitectureConfig& arch) const {
  for (const BlockId& b : blocks) {
    if (!arch.has_block(b)) {
      fail(ErrorKind::parameter, "injection block " + b.name() +
                                     " does not exist in the architecture");
    }
  }
}

std::string blocks_label(const InjectionConfig& cfg) {
  auto one = [](const BlockId& b) {
    return b.path == BlockPath::up ? std::to_string(b.index) : b.name();
  };
  if (cfg.blocks.size() == 1) return one(*cfg.blocks.begin());
  std::string out = "[";
  bool first = true;
  for (const BlockId& b : cfg.blocks) {
    if (!first) out += ";";
    out += one(b);
    first = false;
  }
  return out + "]";
}

InjectionConfig parse_blocks(const std::string& text) {
  std::string body = text;
  if (!body.empty() && body.front() == '[') {
    if (body.back() != ']') fail(ErrorKind::parameter, "unbalanced block list '" + text + "'");
    body = body.substr(1, body.size() - 2);
  }
  InjectionConfig cfg;
  std::string item;
  auto flush = [&] {
    std::string trimmed;
    for (char ch : item)
      if (ch != ' ') trimmed += ch;
    if (!trimmed.empty()) cfg.blocks.insert(parse_block_id(trimmed));
    item.clear();
  };
  for (char ch : body) {
    if (ch == ',' || ch == ';') flush();
    else item += ch;
  }
  flush();
  return cfg;
}

std::optional<KvPair> CaptureHook::on_self_attention(const BlockId& block, int timestep,
                                                     const Tensor&, const Tensor& key,
                                                     const Tensor& value) {
  store_.insert(block, timestep, KvPair{key, value});
  return std::nullopt;
}

std::optional<KvPair> SgsaHook::on_self_attention(const BlockId& block, int timestep,
                                                  const Tensor&, const Tensor&,
                                                  const Tensor&) {
  const KvPair* kv = store_.find(block, timestep);
  if (kv == nullptr) {
    fail(ErrorKind::injection_miss, "no style snapshot for (" + block.name() + ", t=" +
                                        std::to_string(timestep) + ")");
  }
  return *kv;
}

void CaAdainParams::validate() const {
  if (!(alpha_c >= 0.0 && alpha_c <= 1.0 && alpha_s >= 0.0 && alpha_s <= 1.0) ||
      std::abs(alpha_c + alpha_s - 1.0) > 1e-9) {
    fail(ErrorKind::parameter, "alpha_c and alpha_s must lie in [0,1] and sum to 1 (got " +
                                   std::to_string(alpha_c) + ", " + std::to_string(alpha_s) +
                                   ")");
  }
}

namespace {

struct FlooredMoments {
  std::vector<double> mean;
  std::vector<double> sigma;
};

FlooredMoments floored_moments(const Tensor& x) {
  const ChannelMoments m = channel_moments(x);
  FlooredMoments out;
  for (std::size_t c = 0; c < m.mean.size(); ++c) {
    out.mean.push_back(m.mean[c]);
    out.sigma.push_back(std::sqrt(m.std[c] * m.std[c] + kStdEpsilon));
  }
  return out;
}

// out = (x - mu(x)) * target_sigma / sigma(x) + target_mean. Channels whose
// target equals their own statistics are copied so the identity is exact.
Tensor renormalize(const Tensor& x, const FlooredMoments& src,
                   const std::vector<double>& target_mean,
                   const std::vector<double>& target_sigma) {
  const std::size_t plane = x.dim(1) * x.dim(2);
  Tensor out = x;
  for (std::size_t c = 0; c < x.dim(0); ++c) {
    if (target_mean[c] == src.mean[c] && target_sigma[c] == src.sigma[c]) continue;
    const double scale = target_sigma[c] / src.sigma[c];
    const double mu = src.mean[c], shift = target_mean[c];
    double* p = out.data().data() + c * plane;
    for (std::size_t i = 0; i < plane; ++i) p[i] = (p[i] - mu) * scale + shift;
  }
  return out;
}

}  // namespace

Tensor adain(const Tensor& x, const Tensor& y) {
  require_same_shape(x, y, "adain");
  const FlooredMoments mx = floored_moments(x);
  const FlooredMoments my = floored_moments(y);
  return renormalize(x, mx, my.mean, my.sigma);
}

Tensor ca_adain(const Tensor& content, const Tensor& style, const CaAdainParams& p) {
  p.validate();
  require_same_shape(content, style, "ca_adain");
  const FlooredMoments mc = floored_moments(content);
  const FlooredMoments ms = floored_moments(style);
  std::vector<double> mean(mc.mean.size()), sigma(mc.mean.size());
  for (std::size_t c = 0; c < mean.size(); ++c) {
    mean[c] = p.alpha_s * ms.mean[c] + p.alpha_c * mc.mean[c];
    sigma[c] = p.alpha_s * ms.sigma[c] + p.alpha_c * mc.sigma[c];
  }
  return renormalize(content, mc, mean, sigma);
}

EmbedderWeights EmbedderWeights::make(std::uint64_t seed, std::size_t height,
                                      std::size_t width, std::size_t pool,
                                      std::size_t tokens, std::size_t dim) {
  if (pool == 0 || height % pool != 0 || width % pool != 0) {
    fail(ErrorKind::dimension, "embedder: " + std::to_string(height) + "x" +
                                   std::to_string(width) +
                                   " is not divisible by pooling factor " +
                                   std::to_string(pool));
  }
  EmbedderWeights w;
  w.pool = pool;
  w.height = height;
  w.width = width;
  w.tokens = tokens;
  w.dim = dim;
  w.seed = seed;
  const std::size_t in = 3 * (height / pool) * (width / pool);
  SeededRng rng(derive_seed(seed, 0xE3BED));
  w.proj = randn(rng, {tokens * dim, in}, 1.0 / std::sqrt(static_cast<double>(in)));
  return w;
}

Tensor extract_embedding(const Tensor& img, const EmbedderWeights& w) {
  if (img.rank() != 3 || img.dim(0) != 3 || img.dim(1) != w.height || img.dim(2) != w.width) {
    fail(ErrorKind::dimension, "extract_embedding: expected [3x" + std::to_string(w.height) +
                                   "x" + std::to_string(w.width) + "], got " +
                                   shape_string(img.shape()));
  }
  const std::size_t gh = w.height / w.pool, gw = w.width / w.pool;
  const double inv_area = 1.0 / static_cast<double>(w.pool * w.pool);
  std::vector<double> pooled;
  pooled.reserve(3 * gh * gw);
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t gy = 0; gy < gh; ++gy)
      for (std::size_t gx = 0; gx < gw; ++gx) {
        double acc = 0.0;
        for (std::size_t dy = 0; dy < w.pool; ++dy)
          for (std::size_t dx = 0; dx < w.pool; ++dx)
            acc += 2.0 * img.at(c, gy * w.pool + dy, gx * w.pool + dx) - 1.0;
        pooled.push_back(acc * inv_area);
      }
  const std::size_t n = pooled.size();
  const Tensor column({n, 1}, std::move(pooled));
  return matmul(w.proj, column).reshaped({w.tokens, w.dim});
}

namespace {

Tensor stream_attention(const Tensor& query, const Tensor& tokens, const Tensor& wk,
                        const Tensor& wv, std::size_t heads, const char* stream) {
  if (tokens.rank() != 2 || tokens.dim(1) != wk.dim(0)) {
    fail(ErrorKind::dimension, std::string("dfca: ") + stream + " tokens " +
                                   shape_string(tokens.shape()) +
                                   " do not match context width " + std::to_string(wk.dim(0)));
  }
  return multi_head_attention(query, matmul(tokens, wk), matmul(tokens, wv), heads);
}

}  // namespace

Tensor dfca(const Tensor& query, const ContextBundle& ctx, const CrossAttentionWeights& w,
            std::size_t heads) {
  Tensor out = stream_attention(query, ctx.text_tokens, w.text_k, w.text_v, heads, "text");
  if (ctx.content_tokens) {
    add_inplace(out, stream_attention(query, *ctx.content_tokens, w.image_k, w.image_v, heads,
                                      "content"));
  }
  if (ctx.style_tokens) {
    add_inplace(out, stream_attention(query, *ctx.style_tokens, w.image_k, w.image_v, heads,
                                      "style"));
  }
  return out;
}

}  // namespace styleflow
