#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <utility>

#include "attention.hpp"
#include "denoiser.hpp"
#include "tensor.hpp"

namespace styleflow {

// (block, timestep) -> captured self-attention (K, V). Written once during
// the style inversion, then read-only.
class AttentionSnapshotStore {
 public:
  using Key = std::pair<BlockId, int>;

  void insert(const BlockId& block, int timestep, KvPair kv);
  const KvPair* find(const BlockId& block, int timestep) const;
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const std::map<Key, KvPair>& entries() const noexcept { return entries_; }

 private:
  std::map<Key, KvPair> entries_;
};

struct InjectionConfig {
  std::set<BlockId> blocks;

  static InjectionConfig default_blocks();  // {up5, up6}
  void validate(const ArchitectureConfig& arch) const;
  bool contains(const BlockId& block) const { return blocks.count(block) != 0; }
};

// "5", "[5;6]", "[down1;up5]", "[]"; up blocks are written by number.
std::string blocks_label(const InjectionConfig& cfg);
// Accepts the label form, with ',' or ';' separators, with or without brackets.
InjectionConfig parse_blocks(const std::string& text);

// Records (K, V) at watched blocks and passes them through unchanged.
class CaptureHook final : public AttentionHook {
 public:
  CaptureHook(AttentionSnapshotStore& store, InjectionConfig watch)
      : store_(store), watch_(std::move(watch)) {}

  bool watches(const BlockId& block) const override { return watch_.contains(block); }
  std::optional<KvPair> on_self_attention(const BlockId& block, int timestep,
                                          const Tensor& query, const Tensor& key,
                                          const Tensor& value) override;

 private:
  AttentionSnapshotStore& store_;
  InjectionConfig watch_;
};

// Substitutes the stored style (K, V) at injected blocks, so the block
// attends Softmax(Q^c K^s^T / sqrt(d)) V^s with the live content query.
class SgsaHook final : public AttentionHook {
 public:
  SgsaHook(const AttentionSnapshotStore& store, InjectionConfig inject)
      : store_(store), inject_(std::move(inject)) {}

  bool watches(const BlockId& block) const override { return inject_.contains(block); }
  std::optional<KvPair> on_self_attention(const BlockId& block, int timestep,
                                          const Tensor& query, const Tensor& key,
                                          const Tensor& value) override;

 private:
  const AttentionSnapshotStore& store_;
  InjectionConfig inject_;
};

struct CaAdainParams {
  double alpha_c = 0.4;
  double alpha_s = 0.6;

  static CaAdainParams from_content_weight(double alpha_c) { return {alpha_c, 1.0 - alpha_c}; }
  void validate() const;
};

// Floor added under the square root of every variance used as a divisor.
inline constexpr double kStdEpsilon = 1e-8;

// sigma(y) (x - mu(x)) / sigma(x) + mu(y), channel-wise.
Tensor adain(const Tensor& x, const Tensor& y);

// Content-aware variant: target statistics are the alpha-weighted blend of
// style and content statistics.
Tensor ca_adain(const Tensor& content, const Tensor& style, const CaAdainParams& p);

// Stand-in for a CLIP image encoder: average-pool, flatten, project.
struct EmbedderWeights {
  std::size_t pool = 8;
  std::size_t height = 32;
  std::size_t width = 32;
  std::size_t tokens = 4;
  std::size_t dim = 32;
  Tensor proj;  // [(tokens*dim) x (3*(height/pool)*(width/pool))]
  std::uint64_t seed = 0;

  static EmbedderWeights make(std::uint64_t seed, std::size_t height, std::size_t width,
                              std::size_t pool = 8, std::size_t tokens = 4,
                              std::size_t dim = 32);
};

// img in [0, 1] is rescaled to [-1, 1] before pooling; returns [tokens x dim].
Tensor extract_embedding(const Tensor& img, const EmbedderWeights& w);

// phi_text + phi_c + phi_s. Absent streams contribute nothing. Content and
// style tokens share the image projections.
Tensor dfca(const Tensor& query, const ContextBundle& ctx, const CrossAttentionWeights& w,
            std::size_t heads);

}  // namespace styleflow
