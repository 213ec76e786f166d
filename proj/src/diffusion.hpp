#pragma once

#include <vector>

#include "attention.hpp"
#include "denoiser.hpp"
#include "tensor.hpp"

namespace styleflow {

// alpha_bar[0] == 1 and alpha_bar[t], t = 1..T, the signal fraction at step t.
class NoiseSchedule {
 public:
  // Explicit sequence; requires alpha_bar[0] == 1, values in (0, 1] and
  // non-increasing. Equal neighbours are allowed here (make_schedule never
  // produces them).
  static NoiseSchedule from_alpha_bar(std::vector<double> alpha_bar);

  int steps() const noexcept { return static_cast<int>(alpha_bar_.size()) - 1; }
  double alpha_bar(int t) const { return alpha_bar_.at(static_cast<std::size_t>(t)); }
  const std::vector<double>& values() const noexcept { return alpha_bar_; }

 private:
  std::vector<double> alpha_bar_;
};

// Scaled-linear betas: sqrt(beta) linear from sqrt(0.00085) to sqrt(0.012)
// over 1000 virtual steps. Step t (1..T) uses virtual index t*1000/T - 1, so
// the last step sits on virtual step 999.
NoiseSchedule make_schedule(int steps);

inline constexpr int kVirtualSteps = 1000;
inline constexpr double kBetaStart = 0.00085;
inline constexpr double kBetaEnd = 0.012;

struct SpiConfig {
  int refinements = 5;  // n; 0 reduces to the linear-assumption inversion
};

struct LatentTrajectory {
  std::vector<Tensor> states;  // x_0 .. x_T
};

// Deterministic (eta = 0) DDIM step x_t -> x_{t-1}.
Tensor ddim_step(const Tensor& x_t, int t, const Tensor& eps, const NoiseSchedule& sched);

// Exact algebraic inverse of ddim_step for a fixed eps: x_{t-1} -> x_t.
Tensor inversion_step_exact_form(const Tensor& x_prev, int t, const Tensor& eps,
                                 const NoiseSchedule& sched);

// Coefficient multiplying eps in inversion_step_exact_form:
// sqrt(abar_t) * (sqrt(1/abar_t - 1) - sqrt(1/abar_{t-1} - 1)).
double inversion_noise_coefficient(int t, const NoiseSchedule& sched);

// Fixed-point refinement: xh := x_{t-1}; repeat n+1 times
// xh := inversion_step_exact_form(x_{t-1}, t, eps(xh)). Hooks are consulted
// only on the last evaluation. `iterates`, when given, receives every xh
// (x_{t-1} first, the result last).
Tensor spi_invert_step(const Tensor& x_prev, int t, const NoisePredictor& denoiser,
                       const ContextBundle& ctx, const SpiConfig& cfg,
                       const NoiseSchedule& sched, const HookList& hooks,
                       std::vector<Tensor>* iterates = nullptr);

LatentTrajectory invert(const Tensor& x0, const NoisePredictor& denoiser,
                        const ContextBundle& ctx, const SpiConfig& cfg,
                        const NoiseSchedule& sched, const HookList& hooks);

struct Guidance {
  double scale = 1.0;
  ContextBundle uncond;  // only used when scale != 1
};

// DDIM loop t = T..1. With guidance scale 1 a single conditional evaluation
// per step; otherwise unconditional and conditional evaluations combined by
// cfg_combine. Hooks see every evaluation.
Tensor sample(const Tensor& x_T, const NoisePredictor& denoiser, const ContextBundle& ctx,
              const Guidance& guidance, const NoiseSchedule& sched, const HookList& hooks);

}  // namespace styleflow
