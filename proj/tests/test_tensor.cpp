#include <doctest.h>

#include <cmath>
#include <string>

#include "rng.hpp"
#include "support.hpp"
#include "tensor.hpp"

using namespace styleflow;
using testsupport::Gen;

TEST_CASE("matmul identity and zero cases") {
  const Tensor m({2, 2}, {3, 4, 5, 6});
  CHECK(matmul(Tensor::identity(2), m) == m);
  const Tensor zero = matmul(Tensor({1, 2}, {1, 2}), Tensor({2, 1}, {0, 0}));
  CHECK(zero.shape() == Shape{1, 1});
  CHECK(zero[0] == 0.0);
}

TEST_CASE("matmul matches a triple-loop oracle") {
  Gen gen(1);
  for (int trial = 0; trial < 20; ++trial) {
    const Tensor a = gen.tensor({4, 5});
    const Tensor b = gen.tensor({5, 3});
    CHECK(max_abs_diff(matmul(a, b), testsupport::triple_loop_matmul(a, b)) <= 1e-6);
    CHECK(max_abs_diff(matmul_transposed(a, transpose(b)), matmul(a, b)) == 0.0);
  }
}

TEST_CASE("matmul by identity is exact") {
  Gen gen(2);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t m = gen.integer(1, 7), n = gen.integer(1, 7);
    const Tensor a = gen.tensor({m, n}, 0.0, 100.0);
    CHECK(matmul(a, Tensor::identity(n)) == a);
  }
}

TEST_CASE("matmul shape mismatch names both shapes") {
  try {
    matmul(Tensor({2, 3}), Tensor({4, 2}));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::dimension);
    const std::string msg = e.what();
    CHECK(msg.find("[2x3]") != std::string::npos);
    CHECK(msg.find("[4x2]") != std::string::npos);
  }
}

TEST_CASE("tensor construction enforces volume") {
  CHECK(testsupport::error_kind_of([] { Tensor({2, 2}, std::vector<double>{1, 2, 3}); }) ==
        ErrorKind::dimension);
  CHECK(Tensor({2, 3}).size() == 6);
}

TEST_CASE("softmax examples") {
  const Tensor a = softmax_rows(Tensor({3, 2}, {0, 0, 1000, 1000, 0, std::log(3.0)}));
  CHECK(a.at(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(a.at(0, 1) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(a.at(1, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(a.at(1, 1) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(std::abs(a.at(2, 0) - 0.25) <= 1e-12);
  CHECK(std::abs(a.at(2, 1) - 0.75) <= 1e-12);
  CHECK(all_finite(a));
}

TEST_CASE("softmax rows are distributions for random finite input") {
  Gen gen(3);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t m = gen.integer(1, 6), n = gen.integer(1, 9);
    const Tensor a = gen.tensor({m, n}, 0.0, std::pow(10.0, gen.uniform(-2, 3)));
    const Tensor s = softmax_rows(a);
    for (std::size_t i = 0; i < m; ++i) {
      double sum = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        CHECK(s.at(i, j) >= 0.0);
        sum += s.at(i, j);
      }
      CHECK(std::abs(sum - 1.0) <= 1e-6);
    }
  }
}

TEST_CASE("channel moments examples") {
  const ChannelMoments c = channel_moments(Tensor({1, 2, 2}, 7.0));
  CHECK(c.mean[0] == 7.0);
  CHECK(c.std[0] == 0.0);
  const ChannelMoments p = channel_moments(Tensor({1, 1, 2}, {-1, 1}));
  CHECK(p.mean[0] == 0.0);
  CHECK(p.std[0] == 1.0);
  CHECK(testsupport::error_kind_of([] { channel_moments(Tensor({2, 0, 3})); }) ==
        ErrorKind::dimension);
}

TEST_CASE("channel moments match a Welford oracle") {
  Gen gen(4);
  for (int trial = 0; trial < 50; ++trial) {
    const Tensor x = gen.tensor({3, 4, 4}, gen.uniform(-5, 5), gen.uniform(0.1, 4));
    const ChannelMoments m = channel_moments(x);
    for (std::size_t c = 0; c < 3; ++c) {
      double mean = 0.0, m2 = 0.0;
      for (std::size_t i = 0; i < 16; ++i) {
        const double v = x[c * 16 + i];
        const double delta = v - mean;
        mean += delta / static_cast<double>(i + 1);
        m2 += delta * (v - mean);
      }
      CHECK(std::abs(m.mean[c] - mean) <= 1e-6);
      CHECK(std::abs(m.std[c] - std::sqrt(m2 / 16.0)) <= 1e-6);
      CHECK(m.std[c] >= 0.0);
    }
  }
}

TEST_CASE("randn determinism, distinctness and statistics") {
  SeededRng a(42), b(42), c(43);
  const Tensor ta = randn(a, {5, 7});
  CHECK(ta == randn(b, {5, 7}));
  CHECK_FALSE(ta == randn(c, {5, 7}));

  SeededRng big(2024);
  const Tensor draws = randn(big, {100000});
  double mean = 0.0;
  for (double v : draws.data()) mean += v;
  mean /= 1e5;
  double var = 0.0;
  for (double v : draws.data()) var += (v - mean) * (v - mean);
  CHECK(std::abs(mean) <= 0.02);
  CHECK(std::abs(std::sqrt(var / 1e5) - 1.0) <= 0.02);
  CHECK(all_finite(draws));
}

TEST_CASE("SplitMix64 reference stream") {
  // Reference first outputs of SplitMix64 seeded with 0.
  SeededRng rng(0);
  CHECK(rng.next_u64() == 0xE220A8397B1DCDAFULL);
  CHECK(rng.next_u64() == 0x6E789E6AA1B965F4ULL);
  CHECK(rng.next_u64() == 0x06C45D188009454FULL);
}

TEST_CASE("uniforms lie in [0, 1)") {
  SeededRng rng(9);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("operations are pure") {
  Gen gen(5);
  const Tensor a = gen.tensor({6, 6}), b = gen.tensor({6, 6});
  CHECK(matmul(a, b) == matmul(a, b));
  CHECK(softmax_rows(a) == softmax_rows(a));
  const Tensor x = gen.tensor({2, 3, 6});
  CHECK(channel_moments(x).std == channel_moments(x).std);
}

TEST_CASE("elementwise helpers") {
  const Tensor a({3}, {1, 2, 3}), b({3}, {4, 5, 6});
  CHECK(add(a, b) == Tensor({3}, {5, 7, 9}));
  CHECK(sub(b, a) == Tensor({3}, {3, 3, 3}));
  CHECK(scale(a, 2) == Tensor({3}, {2, 4, 6}));
  CHECK(axpy(a, 2, b) == Tensor({3}, {9, 12, 15}));
  CHECK(l2_norm(Tensor({2}, {3, 4})) == 5.0);
  CHECK(testsupport::error_kind_of([&] { add(a, Tensor({2})); }) == ErrorKind::dimension);
}
