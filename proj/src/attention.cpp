#include "attention.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "errors.hpp"

namespace styleflow {

std::string BlockId::name() const {
  switch (path) {
    case BlockPath::down: return "down" + std::to_string(index);
    case BlockPath::mid: return "mid" + std::to_string(index);
    case BlockPath::up: return "up" + std::to_string(index);
  }
  return "?";
}

BlockId parse_block_id(const std::string& text) {
  auto parse_index = [&](std::size_t offset) {
    const std::string digits = text.substr(offset);
    if (digits.empty() || !std::all_of(digits.begin(), digits.end(), ::isdigit)) {
      fail(ErrorKind::parameter, "invalid block id '" + text + "'");
    }
    return std::stoi(digits);
  };
  if (text.rfind("down", 0) == 0) return BlockId::down(parse_index(4));
  if (text.rfind("mid", 0) == 0) return BlockId::mid(parse_index(3));
  if (text.rfind("up", 0) == 0) return BlockId::up(parse_index(2));
  return BlockId::up(parse_index(0));
}

Tensor multi_head_attention(const Tensor& query, const Tensor& key, const Tensor& value,
                            std::size_t heads) {
  if (query.rank() != 2 || key.rank() != 2 || value.rank() != 2) {
    fail(ErrorKind::dimension, "attention: Q, K, V must be matrices");
  }
  const std::size_t rows = query.dim(0), width = query.dim(1), tokens = key.dim(0);
  if (key.dim(1) != width || value.dim(0) != tokens || value.dim(1) != width) {
    fail(ErrorKind::dimension, "attention: incompatible Q " + shape_string(query.shape()) +
                                   ", K " + shape_string(key.shape()) + ", V " +
                                   shape_string(value.shape()));
  }
  if (heads == 0 || width % heads != 0 || tokens == 0) {
    fail(ErrorKind::dimension, "attention: width " + std::to_string(width) +
                                   " not divisible into " + std::to_string(heads) + " heads");
  }
  const std::size_t head_dim = width / heads;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(head_dim));
  Tensor out({rows, width});
  std::vector<double> weights(tokens);
  const double* q = query.data().data();
  const double* k = key.data().data();
  const double* v = value.data().data();
  double* o = out.data().data();
  for (std::size_t h = 0; h < heads; ++h) {
    const std::size_t off = h * head_dim;
    for (std::size_t i = 0; i < rows; ++i) {
      const double* qi = q + i * width + off;
      double mx = -INFINITY;
      for (std::size_t j = 0; j < tokens; ++j) {
        const double* kj = k + j * width + off;
        double s = 0.0;
        for (std::size_t c = 0; c < head_dim; ++c) s += qi[c] * kj[c];
        weights[j] = s * inv_sqrt;
        mx = std::max(mx, weights[j]);
      }
      double total = 0.0;
      for (std::size_t j = 0; j < tokens; ++j) {
        weights[j] = std::exp(weights[j] - mx);
        total += weights[j];
      }
      double* oi = o + i * width + off;
      for (std::size_t j = 0; j < tokens; ++j) {
        const double wj = weights[j] / total;
        const double* vj = v + j * width + off;
        for (std::size_t c = 0; c < head_dim; ++c) oi[c] += wj * vj[c];
      }
    }
  }
  return out;
}

}  // namespace styleflow
