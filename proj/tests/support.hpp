// Shared test helpers: hand-rolled generators and independent oracles.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "attention.hpp"
#include "errors.hpp"
#include "tensor.hpp"

namespace testsupport {

using styleflow::Shape;
using styleflow::Tensor;

// Generator independent of the library RNG so oracles do not share its bugs.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : eng_(seed) {}

  double uniform(double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(eng_);
  }
  double normal(double mean = 0.0, double sd = 1.0) {
    return std::normal_distribution<double>(mean, sd)(eng_);
  }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng_); }

  Tensor tensor(const Shape& shape, double mean = 0.0, double sd = 1.0) {
    Tensor t(shape);
    for (double& v : t.data()) v = normal(mean, sd);
    return t;
  }
  Tensor image(std::size_t h, std::size_t w) {
    Tensor t({3, h, w});
    for (double& v : t.data()) v = uniform();
    return t;
  }
  // 8-bit quantised image, exactly representable in PPM.
  Tensor byte_image(std::size_t h, std::size_t w) {
    Tensor t({3, h, w});
    for (double& v : t.data()) v = integer(0, 255) / 255.0;
    return t;
  }

 private:
  std::mt19937_64 eng_;
};

inline Tensor triple_loop_matmul(const Tensor& a, const Tensor& b) {
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  Tensor out({m, n});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += a.at(i, p) * b.at(p, j);
      out.at(i, j) = acc;
    }
  return out;
}

inline Eigen::MatrixXd to_eigen(const Tensor& a) {
  Eigen::MatrixXd m(a.dim(0), a.dim(1));
  for (std::size_t i = 0; i < a.dim(0); ++i)
    for (std::size_t j = 0; j < a.dim(1); ++j) m(i, j) = a.at(i, j);
  return m;
}

inline Eigen::VectorXd to_vector(const Tensor& a) {
  Eigen::VectorXd v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v(i) = a[i];
  return v;
}

inline Tensor from_vector(const Eigen::VectorXd& v, const Shape& shape) {
  return Tensor(shape, std::vector<double>(v.data(), v.data() + v.size()));
}

// Single-head scaled dot product attention written out longhand.
inline Tensor naive_attention(const Tensor& q, const Tensor& k, const Tensor& v) {
  const std::size_t l = q.dim(0), m = k.dim(0), d = q.dim(1), dv = v.dim(1);
  Tensor out({l, dv});
  for (std::size_t i = 0; i < l; ++i) {
    std::vector<double> logits(m);
    double mx = -INFINITY;
    for (std::size_t j = 0; j < m; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < d; ++p) s += q.at(i, p) * k.at(j, p);
      logits[j] = s / std::sqrt(static_cast<double>(d));
      mx = std::max(mx, logits[j]);
    }
    double z = 0.0;
    for (double& lg : logits) z += (lg = std::exp(lg - mx));
    for (std::size_t j = 0; j < m; ++j)
      for (std::size_t p = 0; p < dv; ++p) out.at(i, p) += logits[j] / z * v.at(j, p);
  }
  return out;
}

// Records every hook invocation; optionally echoes K,V back as a replacement.
class RecordingHook final : public styleflow::AttentionHook {
 public:
  struct Call {
    styleflow::BlockId block;
    int timestep;
  };

  explicit RecordingHook(bool watch_all = true, bool echo = false)
      : watch_all_(watch_all), echo_(echo) {}

  bool watches(const styleflow::BlockId&) const override { return watch_all_; }
  std::optional<styleflow::KvPair> on_self_attention(const styleflow::BlockId& block,
                                                     int timestep, const Tensor&,
                                                     const Tensor& key,
                                                     const Tensor& value) override {
    calls.push_back({block, timestep});
    if (echo_) return styleflow::KvPair{key, value};
    return std::nullopt;
  }

  std::vector<Call> calls;

 private:
  bool watch_all_;
  bool echo_;
};

// Wraps another hook and logs the calls that reach it.
class LoggingDecorator final : public styleflow::AttentionHook {
 public:
  explicit LoggingDecorator(styleflow::AttentionHook& inner) : inner_(inner) {}

  bool watches(const styleflow::BlockId& block) const override { return inner_.watches(block); }
  std::optional<styleflow::KvPair> on_self_attention(const styleflow::BlockId& block,
                                                     int timestep, const Tensor& q,
                                                     const Tensor& k,
                                                     const Tensor& v) override {
    calls.push_back({block, timestep});
    return inner_.on_self_attention(block, timestep, q, k, v);
  }

  std::vector<RecordingHook::Call> calls;

 private:
  styleflow::AttentionHook& inner_;
};

template <typename Fn>
styleflow::ErrorKind error_kind_of(Fn&& fn) {
  try {
    fn();
  } catch (const styleflow::Error& e) {
    return e.kind();
  }
  throw std::logic_error("expected a styleflow::Error");
}

}  // namespace testsupport
