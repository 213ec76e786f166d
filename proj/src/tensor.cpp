#include "tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "errors.hpp"

namespace styleflow {

std::string shape_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

std::size_t shape_volume(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

Tensor::Tensor(Shape shape, double fill)
    : shape_(std::move(shape)), data_(shape_volume(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_volume(shape_) != data_.size()) {
    fail(ErrorKind::dimension, "tensor: shape " + shape_string(shape_) +
                                   " does not hold " +
                                   std::to_string(data_.size()) + " values");
  }
}

Tensor Tensor::identity(std::size_t n) {
  Tensor out({n, n});
  for (std::size_t i = 0; i < n; ++i) out.at(i, i) = 1.0;
  return out;
}

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= shape_.size()) {
    fail(ErrorKind::dimension, "tensor: axis " + std::to_string(axis) +
                                   " out of range for " + shape_string(shape_));
  }
  return shape_[axis];
}

Tensor Tensor::reshaped(Shape shape) const {
  return Tensor(std::move(shape), data_);
}

static void require_matrix(const Tensor& a, const char* op) {
  if (a.rank() != 2) {
    fail(ErrorKind::dimension,
         std::string(op) + ": expected a matrix, got " + shape_string(a.shape()));
  }
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_matrix(a, "matmul");
  require_matrix(b, "matmul");
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) {
    fail(ErrorKind::dimension, "matmul: inner dimensions disagree: " +
                                   shape_string(a.shape()) + " vs " +
                                   shape_string(b.shape()));
  }
  Tensor out({m, n});
  std::vector<double> acc(n);
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  double* po = out.data().data();
  for (std::size_t i = 0; i < m; ++i) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t p = 0; p < k; ++p) {
      const double av = pa[i * k + p];
      const double* brow = pb + p * n;
      for (std::size_t j = 0; j < n; ++j) acc[j] += av * brow[j];
    }
    std::copy(acc.begin(), acc.end(), po + i * n);
  }
  return out;
}

Tensor matmul_transposed(const Tensor& a, const Tensor& b) {
  require_matrix(a, "matmul_transposed");
  require_matrix(b, "matmul_transposed");
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(0);
  if (b.dim(1) != k) {
    fail(ErrorKind::dimension, "matmul_transposed: inner dimensions disagree: " +
                                   shape_string(a.shape()) + " vs " +
                                   shape_string(b.shape()));
  }
  Tensor out({m, n});
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += pa[i * k + p] * pb[j * k + p];
      out.at(i, j) = acc;
    }
  }
  return out;
}

Tensor transpose(const Tensor& a) {
  require_matrix(a, "transpose");
  const std::size_t m = a.dim(0), n = a.dim(1);
  Tensor out({n, m});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out.at(j, i) = a.at(i, j);
  return out;
}

Tensor softmax_rows(const Tensor& a) {
  require_matrix(a, "softmax_rows");
  const std::size_t m = a.dim(0), n = a.dim(1);
  Tensor out({m, n});
  for (std::size_t i = 0; i < m; ++i) {
    double mx = a.at(i, 0);
    for (std::size_t j = 1; j < n; ++j) mx = std::max(mx, a.at(i, j));
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double e = std::exp(a.at(i, j) - mx);
      out.at(i, j) = e;
      total += e;
    }
    for (std::size_t j = 0; j < n; ++j) out.at(i, j) /= total;
  }
  return out;
}

ChannelMoments channel_moments(const Tensor& x) {
  if (x.rank() != 3 || x.dim(1) * x.dim(2) == 0) {
    fail(ErrorKind::dimension, "channel_moments: expected C x H x W with H*W >= 1, got " +
                                   shape_string(x.shape()));
  }
  const std::size_t channels = x.dim(0);
  const std::size_t plane = x.dim(1) * x.dim(2);
  ChannelMoments m{Tensor({channels}), Tensor({channels})};
  for (std::size_t c = 0; c < channels; ++c) {
    const double* p = x.data().data() + c * plane;
    double sum = 0.0;
    for (std::size_t i = 0; i < plane; ++i) sum += p[i];
    const double mean = sum / static_cast<double>(plane);
    double sq = 0.0;
    for (std::size_t i = 0; i < plane; ++i) sq += (p[i] - mean) * (p[i] - mean);
    m.mean[c] = mean;
    m.std[c] = std::sqrt(sq / static_cast<double>(plane));
  }
  return m;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    fail(ErrorKind::dimension, std::string(op) + ": shape mismatch " +
                                   shape_string(a.shape()) + " vs " +
                                   shape_string(b.shape()));
  }
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  Tensor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
  return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  Tensor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b[i];
  return out;
}

Tensor scale(const Tensor& a, double s) {
  Tensor out = a;
  for (double& v : out.data()) v *= s;
  return out;
}

Tensor axpy(const Tensor& a, double s, const Tensor& b) {
  require_same_shape(a, b, "axpy");
  Tensor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += s * b[i];
  return out;
}

void add_inplace(Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add_inplace");
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
}

double l2_norm(const Tensor& a) {
  double acc = 0.0;
  for (double v : a.data()) acc += v * v;
  return std::sqrt(acc);
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

bool all_finite(const Tensor& a) {
  return std::all_of(a.data().begin(), a.data().end(),
                     [](double v) { return std::isfinite(v); });
}

}  // namespace styleflow
