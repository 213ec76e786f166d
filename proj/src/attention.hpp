#pragma once

#include <compare>
#include <optional>
#include <string>
#include <vector>

#include "tensor.hpp"

namespace styleflow {

enum class BlockPath { down = 0, mid = 1, up = 2 };

struct BlockId {
  BlockPath path = BlockPath::up;
  int index = 1;  // 1-based within its path

  static constexpr BlockId down(int i) { return {BlockPath::down, i}; }
  static constexpr BlockId mid(int i) { return {BlockPath::mid, i}; }
  static constexpr BlockId up(int i) { return {BlockPath::up, i}; }

  // "down1", "mid1", "up5"
  std::string name() const;

  auto operator<=>(const BlockId&) const = default;
};

// Accepts "up5", "down1", "mid1" or a bare number (an up block).
BlockId parse_block_id(const std::string& text);

struct KvPair {
  Tensor key;
  Tensor value;
};

// Consulted at every self-attention of a watched block. Q is passed by const
// reference and can never be replaced; returning a KvPair substitutes the
// block's K and V, returning nullopt passes them through.
class AttentionHook {
 public:
  virtual ~AttentionHook() = default;
  virtual bool watches(const BlockId& block) const = 0;
  virtual std::optional<KvPair> on_self_attention(const BlockId& block, int timestep,
                                                  const Tensor& query, const Tensor& key,
                                                  const Tensor& value) = 0;
};

using HookList = std::vector<AttentionHook*>;

struct ContextBundle {
  Tensor text_tokens;                   // [L_t x d_c]
  std::optional<Tensor> content_tokens;  // [L_i x d_c]
  std::optional<Tensor> style_tokens;    // [L_i x d_c]
};

// Softmax(Q K^T / sqrt(d_head)) V evaluated independently per head over
// contiguous column slices. Q: [L x d], K: [M x d], V: [M x d].
Tensor multi_head_attention(const Tensor& query, const Tensor& key, const Tensor& value,
                            std::size_t heads);

}  // namespace styleflow
