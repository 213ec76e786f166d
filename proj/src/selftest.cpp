#include "selftest.hpp"

#include <cmath>
#include <cstdio>
#include <functional>

#include "codec.hpp"
#include "denoiser.hpp"
#include "diffusion.hpp"
#include "errors.hpp"
#include "image_io.hpp"
#include "metrics.hpp"
#include "rng.hpp"
#include "style_control.hpp"

namespace styleflow {

namespace {

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

// Dense Gaussian elimination with partial pivoting; m is overwritten.
std::vector<double> solve_dense(std::vector<double> m, std::vector<double> rhs, std::size_t n) {
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(m[r * n + col]) > std::abs(m[pivot * n + col])) pivot = r;
    if (pivot != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(m[col * n + c], m[pivot * n + c]);
      std::swap(rhs[col], rhs[pivot]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = m[r * n + col] / m[col * n + col];
      for (std::size_t c = col; c < n; ++c) m[r * n + c] -= f * m[col * n + c];
      rhs[r] -= f * rhs[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double acc = rhs[i];
    for (std::size_t c = i + 1; c < n; ++c) acc -= m[i * n + c] * x[c];
    x[i] = acc / m[i * n + i];
  }
  return x;
}

SelftestResult check_artfid() {
  const double v = artfid(18.559, 0.467);
  return {"artfid composition", std::abs(v - 28.693) <= 1e-3, "artfid(18.559, 0.467) = " +
                                                                  format_number(v)};
}

SelftestResult check_inverse_pair() {
  const NoiseSchedule sched = make_schedule(20);
  SeededRng rng(11);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int t = 1 + static_cast<int>(rng.next_u64() % 20);
    const Tensor x = randn(rng, {48, 2, 2});
    const Tensor eps = randn(rng, {48, 2, 2});
    worst = std::max(worst, max_abs_diff(ddim_step(inversion_step_exact_form(x, t, eps, sched),
                                                   t, eps, sched),
                                         x));
  }
  return {"ddim / exact inversion inverse pair", worst <= 1e-5, "max error " + sci(worst)};
}

SelftestResult check_spi_contraction() {
  const std::size_t dim = 48;
  const NoiseSchedule sched = make_schedule(20);
  const LinearDenoiser den(LinearDenoiserWeights::make(dim, 3));
  const Tensor& a = den.weights().a;
  SeededRng rng(12);
  const ContextBundle ctx{Tensor({1, 1}), {}, {}};
  bool ok = true;
  double worst_final = 0.0;
  for (int t = 1; t <= 20; ++t) {
    const Tensor x_prev = randn(rng, {dim, 1, 1});
    const double c = inversion_noise_coefficient(t, sched);
    const double gain = std::sqrt(sched.alpha_bar(t) / sched.alpha_bar(t - 1));
    std::vector<double> m(dim * dim), rhs(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      for (std::size_t j = 0; j < dim; ++j) m[i * dim + j] = (i == j ? 1.0 : 0.0) - c * a.at(i, j);
      rhs[i] = gain * x_prev[i];
    }
    const Tensor fixed({dim, 1, 1}, solve_dense(m, rhs, dim));
    std::vector<Tensor> iterates;
    spi_invert_step(x_prev, t, den, ctx, SpiConfig{5}, sched, {}, &iterates);
    const double bound = std::abs(c) * den.weights().rho + 1e-6;
    for (std::size_t i = 1; i < iterates.size(); ++i) {
      const double before = l2_norm(sub(iterates[i - 1], fixed));
      const double after = l2_norm(sub(iterates[i], fixed));
      if (before > 1e-12 && after / before > bound) ok = false;
    }
    const double ratio =
        l2_norm(sub(iterates.back(), fixed)) / l2_norm(sub(iterates.front(), fixed));
    worst_final = std::max(worst_final, ratio);
  }
  ok = ok && worst_final <= 1e-3;
  return {"SPI contraction onto the linear fixed point", ok,
          "worst n=5 residual ratio " + sci(worst_final)};
}

SelftestResult check_ca_adain() {
  SeededRng rng(13);
  const Tensor xc = randn(rng, {4, 5, 5});
  Tensor xs = randn(rng, {4, 5, 5}, 2.0);
  for (double& v : xs.data()) v += 1.5;
  const ChannelMoments mc = channel_moments(xc), ms = channel_moments(xs);
  double worst = 0.0;
  for (int k = 0; k <= 10; ++k) {
    const CaAdainParams p = CaAdainParams::from_content_weight(k / 10.0);
    const ChannelMoments mo = channel_moments(ca_adain(xc, xs, p));
    for (std::size_t c = 0; c < 4; ++c) {
      worst = std::max(worst, std::abs(mo.mean[c] - (p.alpha_s * ms.mean[c] + p.alpha_c * mc.mean[c])));
      worst = std::max(worst, std::abs(mo.std[c] - (p.alpha_s * ms.std[c] + p.alpha_c * mc.std[c])));
    }
  }
  return {"CA-AdaIN moment blending", worst <= 1e-5, "max moment error " + sci(worst)};
}

SelftestResult check_dfca() {
  SeededRng rng(14);
  ArchitectureConfig arch;
  arch.latent_channels = 48;
  const DenoiserWeights w = DenoiserWeights::make(arch, 5);
  const CrossAttentionWeights& cw = w.blocks.front().cross;
  const Tensor q = randn(rng, {6, arch.width});
  const ContextBundle full{randn(rng, {3, arch.context_dim}), randn(rng, {4, arch.context_dim}),
                           randn(rng, {4, arch.context_dim})};
  const Tensor text_only = dfca(q, {full.text_tokens, {}, {}}, cw, arch.heads);
  Tensor sum = text_only;
  add_inplace(sum, multi_head_attention(q, matmul(*full.content_tokens, cw.image_k),
                                        matmul(*full.content_tokens, cw.image_v), arch.heads));
  add_inplace(sum, multi_head_attention(q, matmul(*full.style_tokens, cw.image_k),
                                        matmul(*full.style_tokens, cw.image_v), arch.heads));
  const double err = max_abs_diff(dfca(q, full, cw, arch.heads), sum);
  return {"DF-CA stream additivity", err <= 1e-5, "max error " + sci(err)};
}

SelftestResult check_sgsa_self_substitution() {
  ArchitectureConfig arch;
  const ToyDenoiser den(DenoiserWeights::make(arch, 6));
  const NoiseSchedule sched = make_schedule(3);
  SeededRng rng(15);
  const Tensor x = randn(rng, {arch.latent_channels, 2, 2});
  const ContextBundle ctx{text_tokens("", 8, arch.context_dim), {}, {}};
  const InjectionConfig blocks = InjectionConfig::default_blocks();

  AttentionSnapshotStore store;
  CaptureHook capture(store, blocks);
  const Tensor captured = sample(x, den, ctx, Guidance{}, sched, {&capture});
  SgsaHook inject(store, blocks);
  const Tensor injected = sample(x, den, ctx, Guidance{}, sched, {&inject});
  const Tensor plain = sample(x, den, ctx, Guidance{}, sched, {});
  const bool ok = injected == plain && captured == plain && store.size() == 6;
  return {"SG-SA self-substitution is a no-op", ok,
          "max difference " + sci(max_abs_diff(injected, plain))};
}

SelftestResult check_codec_and_ppm() {
  const CodecWeights codec = CodecWeights::make(7);
  SeededRng rng(16);
  Tensor img({3, 8, 8});
  for (double& v : img.data()) v = static_cast<double>(rng.next_u64() % 256) / 255.0;
  const double codec_err = max_abs_diff(decode(encode(img, codec), codec, false), img);
  const double ppm_err = max_abs_diff(decode_ppm(encode_ppm(img)), img);
  return {"codec and PPM round trips", codec_err <= 1e-5 && ppm_err == 0.0,
          "codec " + sci(codec_err) + ", ppm " + sci(ppm_err)};
}

}  // namespace

std::vector<SelftestResult> run_selftest() {
  const std::vector<std::function<SelftestResult()>> checks = {
      check_artfid,         check_inverse_pair,           check_spi_contraction,
      check_ca_adain,       check_dfca,                   check_sgsa_self_substitution,
      check_codec_and_ppm,
  };
  std::vector<SelftestResult> results;
  for (const auto& check : checks) {
    try {
      results.push_back(check());
    } catch (const std::exception& e) {
      results.push_back({"(exception)", false, e.what()});
    }
  }
  return results;
}

}  // namespace styleflow
