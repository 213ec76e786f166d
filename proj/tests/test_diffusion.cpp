#include <doctest.h>

#include <cmath>

#include "denoiser.hpp"
#include "diffusion.hpp"
#include "support.hpp"

using namespace styleflow;
using testsupport::Gen;
using testsupport::RecordingHook;

namespace {

const ContextBundle& empty_ctx() {
  static const ContextBundle ctx{text_tokens("", 8, 32), {}, {}};
  return ctx;
}

const ToyDenoiser& toy() {
  static const ToyDenoiser den(DenoiserWeights::make(ArchitectureConfig{}, 31));
  return den;
}

// x_{t-1} regrouped as gain * x_t + coefficient * eps.
double ddim_reference(double x, double eps, double a_t, double a_prev) {
  return std::sqrt(a_prev / a_t) * x +
         (std::sqrt(1.0 - a_prev) - std::sqrt(a_prev * (1.0 - a_t) / a_t)) * eps;
}

}  // namespace

TEST_CASE("schedule shape and endpoints") {
  const NoiseSchedule s = make_schedule(20);
  CHECK(s.steps() == 20);
  CHECK(s.alpha_bar(0) == 1.0);
  for (int t = 1; t <= 20; ++t) {
    CHECK(s.alpha_bar(t) < s.alpha_bar(t - 1));
    CHECK(s.alpha_bar(t) > 0.0);
  }
  // Independent numpy cumulative product over the closed-form beta sequence.
  CHECK(std::abs(s.alpha_bar(1) - 0.9526255507597037) <= 1e-6);
  CHECK(std::abs(s.alpha_bar(9) - 0.3485339104542849) <= 1e-6);
  CHECK(std::abs(s.alpha_bar(10) - 0.27766965045646763) <= 1e-6);
  CHECK(std::abs(s.alpha_bar(20) - 0.004660098513077238) <= 1e-6);
  CHECK(make_schedule(1000).steps() == 1000);
  CHECK(std::abs(make_schedule(1).alpha_bar(1) - s.alpha_bar(20)) == 0.0);
}

TEST_CASE("schedule parameter errors") {
  CHECK(testsupport::error_kind_of([] { make_schedule(0); }) == ErrorKind::parameter);
  CHECK(testsupport::error_kind_of([] { make_schedule(-3); }) == ErrorKind::parameter);
  CHECK(testsupport::error_kind_of([] { make_schedule(1001); }) == ErrorKind::parameter);
  CHECK(testsupport::error_kind_of([] { NoiseSchedule::from_alpha_bar({0.9, 0.5}); }) ==
        ErrorKind::parameter);
  CHECK(testsupport::error_kind_of([] { NoiseSchedule::from_alpha_bar({1.0, 0.5, 0.6}); }) ==
        ErrorKind::parameter);
}

TEST_CASE("ddim step examples") {
  const NoiseSchedule s = make_schedule(20);
  Gen gen(1);
  const Tensor x = gen.tensor({48, 2, 2});
  const Tensor zero({48, 2, 2});
  const Tensor no_noise = ddim_step(x, 10, zero, s);
  CHECK(max_abs_diff(no_noise, scale(x, std::sqrt(s.alpha_bar(9) / s.alpha_bar(10)))) <= 1e-12);

  const NoiseSchedule flat = NoiseSchedule::from_alpha_bar({1.0, 0.7, 0.7, 0.2});
  const Tensor eps = gen.tensor({48, 2, 2});
  CHECK(max_abs_diff(ddim_step(x, 2, eps, flat), x) <= 1e-12);

  const Tensor out = ddim_step(x, 10, eps, s);
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(std::abs(out[i] - ddim_reference(x[i], eps[i], s.alpha_bar(10), s.alpha_bar(9))) <= 1e-6);
  }
}

TEST_CASE("inversion step examples") {
  const NoiseSchedule s = make_schedule(20);
  Gen gen(2);
  const Tensor x = gen.tensor({48, 2, 2});
  CHECK(max_abs_diff(inversion_step_exact_form(x, 10, Tensor({48, 2, 2}), s),
                     scale(x, std::sqrt(s.alpha_bar(10) / s.alpha_bar(9)))) <= 1e-12);
  const double a_t = s.alpha_bar(10), a_prev = s.alpha_bar(9);
  const double hand = std::sqrt(1.0 - a_t) - std::sqrt(a_t / a_prev) * std::sqrt(1.0 - a_prev);
  CHECK(std::abs(inversion_noise_coefficient(10, s) - hand) <= 1e-6);
  // The noise term enters with a positive sign: noise is added while inverting.
  CHECK(inversion_noise_coefficient(10, s) > 0.0);
}

TEST_CASE("inverse pair identity over random triples") {
  Gen gen(3);
  for (int steps : {1, 7, 20, 50}) {
    const NoiseSchedule s = make_schedule(steps);
    for (int trial = 0; trial < 100; ++trial) {
      const int t = gen.integer(1, steps);
      const Tensor x = gen.tensor({48, 1, 2}, 0.0, gen.uniform(0.1, 5));
      const Tensor eps = gen.tensor({48, 1, 2});
      CHECK(max_abs_diff(ddim_step(inversion_step_exact_form(x, t, eps, s), t, eps, s), x) <= 1e-5);
    }
  }
}

TEST_CASE("step functions reject out-of-range timesteps") {
  const NoiseSchedule s = make_schedule(20);
  const Tensor x({48, 1, 1});
  CHECK(testsupport::error_kind_of([&] { ddim_step(x, 0, x, s); }) == ErrorKind::parameter);
  CHECK(testsupport::error_kind_of([&] { ddim_step(x, 21, x, s); }) == ErrorKind::parameter);
  CHECK(testsupport::error_kind_of([&] { inversion_step_exact_form(x, 0, x, s); }) ==
        ErrorKind::parameter);
  CHECK(testsupport::error_kind_of([&] { inversion_step_exact_form(x, 21, x, s); }) ==
        ErrorKind::parameter);
  CHECK(testsupport::error_kind_of([&] { ddim_step(x, 3, Tensor({48, 1, 2}), s); }) ==
        ErrorKind::dimension);
}

TEST_CASE("SPI with n = 0 is one linear-assumption step") {
  const NoiseSchedule s = make_schedule(20);
  Gen gen(4);
  const Tensor x = gen.tensor({48, 2, 2});
  const Tensor naive = inversion_step_exact_form(x, 6, toy().predict_noise(x, 6, empty_ctx(), {}), s);
  CHECK(spi_invert_step(x, 6, toy(), empty_ctx(), SpiConfig{0}, s, {}) == naive);
  CHECK(testsupport::error_kind_of([&] {
          spi_invert_step(x, 6, toy(), empty_ctx(), SpiConfig{-1}, s, {});
        }) == ErrorKind::parameter);
}

TEST_CASE("SPI converges to the closed-form linear fixed point at the predicted rate") {
  const std::size_t dim = 48;
  const NoiseSchedule s = make_schedule(20);
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const LinearDenoiser den(LinearDenoiserWeights::make(dim, seed));
    const Eigen::MatrixXd a = testsupport::to_eigen(den.weights().a);
    Gen gen(100 + seed);
    for (int t = 1; t <= 20; ++t) {
      const Tensor x_prev = gen.tensor({dim, 1, 1});
      const double ab = s.alpha_bar(t), ap = s.alpha_bar(t - 1);
      const double gamma = std::sqrt(1.0 / ab - 1.0) - std::sqrt(1.0 / ap - 1.0);
      const double c = std::sqrt(ab) * gamma;
      const Eigen::MatrixXd m = Eigen::MatrixXd::Identity(dim, dim) - c * a;
      const Eigen::VectorXd fixed =
          m.partialPivLu().solve(std::sqrt(ab / ap) * testsupport::to_vector(x_prev));

      std::vector<Tensor> iterates;
      const Tensor out = spi_invert_step(x_prev, t, den, empty_ctx(), SpiConfig{5}, s, {}, &iterates);
      REQUIRE(iterates.size() == 7);
      CHECK(iterates.front() == x_prev);
      CHECK(iterates.back() == out);
      const double bound = std::abs(c) * 0.5 + 1e-6;
      for (std::size_t i = 1; i < iterates.size(); ++i) {
        const double before = (testsupport::to_vector(iterates[i - 1]) - fixed).norm();
        const double after = (testsupport::to_vector(iterates[i]) - fixed).norm();
        CHECK(after <= before);
        if (before > 1e-13) CHECK(after / before <= bound);
      }
      CHECK((testsupport::to_vector(out) - fixed).norm() <= 1e-3 * fixed.norm());
    }
  }
}

TEST_CASE("hooks see only the final refinement pass") {
  const NoiseSchedule s = make_schedule(3);
  Gen gen(5);
  RecordingHook hook;
  const LatentTrajectory traj =
      invert(gen.tensor({48, 2, 2}), toy(), empty_ctx(), SpiConfig{2}, s, {&hook});
  REQUIRE(hook.calls.size() == 3 * 9);
  for (std::size_t i = 0; i < hook.calls.size(); ++i) CHECK(hook.calls[i].timestep == int(i / 9) + 1);
  CHECK(traj.states.size() == 4);
}

TEST_CASE("invert builds a T+1 trajectory starting at x0") {
  const NoiseSchedule s = make_schedule(5);
  Gen gen(6);
  const Tensor x0 = gen.tensor({48, 2, 2});
  const LatentTrajectory traj = invert(x0, toy(), empty_ctx(), SpiConfig{1}, s, {});
  REQUIRE(traj.states.size() == 6);
  CHECK(traj.states[0] == x0);
  for (const Tensor& st : traj.states) CHECK(st.shape() == x0.shape());
  // Each state is the SPI step from the previous one.
  CHECK(traj.states[3] == spi_invert_step(traj.states[2], 3, toy(), empty_ctx(), SpiConfig{1}, s, {}));
}

TEST_CASE("linear round trip with n = 5") {
  const NoiseSchedule s = make_schedule(20);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const LinearDenoiser den(LinearDenoiserWeights::make(192, seed));
    Gen gen(200 + seed);
    const Tensor x0 = gen.tensor({48, 2, 2});
    const Tensor xT = invert(x0, den, empty_ctx(), SpiConfig{5}, s, {}).states.back();
    const Tensor back = sample(xT, den, empty_ctx(), Guidance{}, s, {});
    CHECK(l2_norm(sub(back, x0)) / l2_norm(x0) <= 1e-3);
  }
}

TEST_CASE("toy round trip improves with refinement") {
  const NoiseSchedule s = make_schedule(20);
  int wins = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Gen gen(300 + seed);
    const Tensor x0 = gen.tensor({48, 2, 2});
    auto roundtrip_error = [&](int n) {
      const Tensor xT = invert(x0, toy(), empty_ctx(), SpiConfig{n}, s, {}).states.back();
      return l2_norm(sub(sample(xT, toy(), empty_ctx(), Guidance{}, s, {}), x0));
    };
    if (roundtrip_error(0) > roundtrip_error(5)) ++wins;
  }
  CHECK(wins >= 9);
}

TEST_CASE("unguided sampling equals a hand-rolled DDIM loop") {
  const NoiseSchedule s = make_schedule(4);
  Gen gen(7);
  const Tensor xT = gen.tensor({48, 2, 2});
  Tensor x = xT;
  for (int t = 4; t >= 1; --t) x = ddim_step(x, t, toy().predict_noise(x, t, empty_ctx(), {}), s);
  const Tensor out = sample(xT, toy(), empty_ctx(), Guidance{}, s, {});
  CHECK(out == x);
  CHECK(sample(xT, toy(), empty_ctx(), Guidance{}, s, {}) == out);

  RecordingHook hook;
  sample(xT, toy(), empty_ctx(), Guidance{}, s, {&hook});
  CHECK(hook.calls.size() == 4 * 9);
}

TEST_CASE("guided sampling combines two evaluations per step") {
  const NoiseSchedule s = make_schedule(3);
  Gen gen(8);
  const Tensor xT = gen.tensor({48, 2, 2});
  const ContextBundle cond{text_tokens("a red bird", 8, 32), {}, {}};
  const Guidance g{3.0, empty_ctx()};
  Tensor x = xT;
  for (int t = 3; t >= 1; --t) {
    const Tensor eu = toy().predict_noise(x, t, empty_ctx(), {});
    const Tensor ec = toy().predict_noise(x, t, cond, {});
    x = ddim_step(x, t, cfg_combine(eu, ec, 3.0), s);
  }
  RecordingHook hook;
  CHECK(sample(xT, toy(), cond, g, s, {&hook}) == x);
  CHECK(hook.calls.size() == 2 * 3 * 9);
}

TEST_CASE("linear sampling equals the composed affine step maps") {
  const std::size_t dim = 96;
  const NoiseSchedule s = make_schedule(20);
  const LinearDenoiser den(LinearDenoiserWeights::make(dim, 12));
  const Eigen::MatrixXd a = testsupport::to_eigen(den.weights().a);
  Eigen::MatrixXd composed = Eigen::MatrixXd::Identity(dim, dim);
  for (int t = 20; t >= 1; --t) {
    const double ab = s.alpha_bar(t), ap = s.alpha_bar(t - 1);
    const double gain = std::sqrt(ap / ab);
    const double coeff = std::sqrt(1.0 - ap) - std::sqrt(ap) * std::sqrt(1.0 - ab) / std::sqrt(ab);
    const Eigen::MatrixXd step = gain * Eigen::MatrixXd::Identity(dim, dim) + coeff * a;
    composed = step * composed;
  }
  Gen gen(9);
  const Tensor xT = gen.tensor({48, 1, 2});
  const Eigen::VectorXd expect = composed * testsupport::to_vector(xT);
  const Tensor out = sample(xT, den, empty_ctx(), Guidance{}, s, {});
  CHECK(out.shape() == xT.shape());
  CHECK((testsupport::to_vector(out) - expect).lpNorm<Eigen::Infinity>() <= 1e-4);
}
