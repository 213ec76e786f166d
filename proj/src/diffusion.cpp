#include "diffusion.hpp"

#include <cmath>

#include "errors.hpp"

namespace styleflow {

NoiseSchedule NoiseSchedule::from_alpha_bar(std::vector<double> alpha_bar) {
  if (alpha_bar.size() < 2 || alpha_bar[0] != 1.0) {
    fail(ErrorKind::parameter, "schedule: needs alpha_bar[0] == 1 and at least one step");
  }
  for (std::size_t t = 1; t < alpha_bar.size(); ++t) {
    if (!(alpha_bar[t] > 0.0 && alpha_bar[t] <= alpha_bar[t - 1])) {
      fail(ErrorKind::parameter, "schedule: alpha_bar must be positive and non-increasing at t=" +
                                     std::to_string(t));
    }
  }
  NoiseSchedule s;
  s.alpha_bar_ = std::move(alpha_bar);
  return s;
}

NoiseSchedule make_schedule(int steps) {
  if (steps < 1 || steps > kVirtualSteps) {
    fail(ErrorKind::parameter, "make_schedule: T must lie in [1, " +
                                   std::to_string(kVirtualSteps) + "], got " +
                                   std::to_string(steps));
  }
  const double lo = std::sqrt(kBetaStart), hi = std::sqrt(kBetaEnd);
  std::vector<double> cumulative(kVirtualSteps);
  double prod = 1.0;
  for (int k = 0; k < kVirtualSteps; ++k) {
    const double root = lo + (hi - lo) * k / (kVirtualSteps - 1);
    prod *= 1.0 - root * root;
    cumulative[static_cast<std::size_t>(k)] = prod;
  }
  std::vector<double> alpha_bar{1.0};
  for (int t = 1; t <= steps; ++t) {
    alpha_bar.push_back(cumulative[static_cast<std::size_t>(t * kVirtualSteps / steps - 1)]);
  }
  return NoiseSchedule::from_alpha_bar(std::move(alpha_bar));
}

static void require_step(int t, const NoiseSchedule& sched, const char* op) {
  if (t < 1 || t > sched.steps()) {
    fail(ErrorKind::parameter, std::string(op) + ": timestep " + std::to_string(t) +
                                   " outside [1, " + std::to_string(sched.steps()) + "]");
  }
}

Tensor ddim_step(const Tensor& x_t, int t, const Tensor& eps, const NoiseSchedule& sched) {
  require_step(t, sched, "ddim_step");
  require_same_shape(x_t, eps, "ddim_step");
  const double a_t = sched.alpha_bar(t), a_prev = sched.alpha_bar(t - 1);
  const double sqrt_a_t = std::sqrt(a_t), sqrt_a_prev = std::sqrt(a_prev);
  const double sigma_t = std::sqrt(1.0 - a_t), sigma_prev = std::sqrt(1.0 - a_prev);
  Tensor out(x_t.shape());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double x0_pred = (x_t[i] - sigma_t * eps[i]) / sqrt_a_t;
    out[i] = sqrt_a_prev * x0_pred + sigma_prev * eps[i];
  }
  return out;
}

double inversion_noise_coefficient(int t, const NoiseSchedule& sched) {
  require_step(t, sched, "inversion_noise_coefficient");
  const double a_t = sched.alpha_bar(t), a_prev = sched.alpha_bar(t - 1);
  return std::sqrt(a_t) * (std::sqrt(1.0 / a_t - 1.0) - std::sqrt(1.0 / a_prev - 1.0));
}

Tensor inversion_step_exact_form(const Tensor& x_prev, int t, const Tensor& eps,
                                 const NoiseSchedule& sched) {
  require_step(t, sched, "inversion_step_exact_form");
  require_same_shape(x_prev, eps, "inversion_step_exact_form");
  const double gain = std::sqrt(sched.alpha_bar(t) / sched.alpha_bar(t - 1));
  const double coeff = inversion_noise_coefficient(t, sched);
  Tensor out(x_prev.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = gain * x_prev[i] + coeff * eps[i];
  return out;
}

Tensor spi_invert_step(const Tensor& x_prev, int t, const NoisePredictor& denoiser,
                       const ContextBundle& ctx, const SpiConfig& cfg,
                       const NoiseSchedule& sched, const HookList& hooks,
                       std::vector<Tensor>* iterates) {
  if (cfg.refinements < 0) {
    fail(ErrorKind::parameter, "spi: refinement count must be >= 0");
  }
  static const HookList no_hooks;
  Tensor estimate = x_prev;
  if (iterates) iterates->push_back(estimate);
  for (int i = 1; i <= cfg.refinements + 1; ++i) {
    const bool last = i == cfg.refinements + 1;
    const Tensor eps = denoiser.predict_noise(estimate, t, ctx, last ? hooks : no_hooks);
    estimate = inversion_step_exact_form(x_prev, t, eps, sched);
    if (iterates) iterates->push_back(estimate);
  }
  return estimate;
}

LatentTrajectory invert(const Tensor& x0, const NoisePredictor& denoiser,
                        const ContextBundle& ctx, const SpiConfig& cfg,
                        const NoiseSchedule& sched, const HookList& hooks) {
  LatentTrajectory traj;
  traj.states.reserve(static_cast<std::size_t>(sched.steps()) + 1);
  traj.states.push_back(x0);
  for (int t = 1; t <= sched.steps(); ++t) {
    traj.states.push_back(
        spi_invert_step(traj.states.back(), t, denoiser, ctx, cfg, sched, hooks));
  }
  return traj;
}

Tensor sample(const Tensor& x_T, const NoisePredictor& denoiser, const ContextBundle& ctx,
              const Guidance& guidance, const NoiseSchedule& sched, const HookList& hooks) {
  Tensor x = x_T;
  for (int t = sched.steps(); t >= 1; --t) {
    Tensor eps;
    if (guidance.scale == 1.0) {
      eps = denoiser.predict_noise(x, t, ctx, hooks);
    } else {
      const Tensor eps_uncond = denoiser.predict_noise(x, t, guidance.uncond, hooks);
      const Tensor eps_cond = denoiser.predict_noise(x, t, ctx, hooks);
      eps = cfg_combine(eps_uncond, eps_cond, guidance.scale);
    }
    x = ddim_step(x, t, eps, sched);
  }
  return x;
}

}  // namespace styleflow
