#include "pipeline.hpp"

#include <chrono>
#include <cmath>

#include "errors.hpp"
#include "metrics.hpp"

namespace styleflow {

void StyleTransferConfig::validate() const {
  if (steps < 1) fail(ErrorKind::parameter, "config: T must be >= 1");
  if (spi_n < 0) fail(ErrorKind::parameter, "config: spi_n must be >= 0");
  if (!std::isfinite(guidance)) fail(ErrorKind::parameter, "config: guidance must be finite");
  alpha.validate();
  injection.validate(ArchitectureConfig{});
}

ModelBundle ModelBundle::make(const StyleTransferConfig& cfg, std::size_t height,
                              std::size_t width) {
  ModelBundle m;
  m.height = height;
  m.width = width;
  m.codec = CodecWeights::make(cfg.seeds.codec);
  if (height % m.codec.patch_size != 0 || width % m.codec.patch_size != 0) {
    fail(ErrorKind::dimension, "images must have sides divisible by " +
                                   std::to_string(m.codec.patch_size));
  }
  m.embedder = EmbedderWeights::make(cfg.seeds.embedder, height, width);
  m.arch = ArchitectureConfig{};
  m.arch.latent_channels = m.codec.latent_channels();
  m.arch.context_dim = m.embedder.dim;
  if (cfg.denoiser == DenoiserKind::toy) {
    m.denoiser = std::make_shared<ToyDenoiser>(DenoiserWeights::make(m.arch, cfg.seeds.weights));
  } else {
    const std::size_t dim = m.codec.latent_channels() * (height / m.codec.patch_size) *
                            (width / m.codec.patch_size);
    m.denoiser =
        std::make_shared<LinearDenoiser>(LinearDenoiserWeights::make(dim, cfg.seeds.weights));
  }
  return m;
}

namespace {

class StageClock {
 public:
  explicit StageClock(std::vector<StageTiming>& sink) : sink_(sink) {}

  template <typename Fn>
  auto run(const char* stage, Fn&& fn) {
    const auto start = std::chrono::steady_clock::now();
    try {
      auto result = fn();
      sink_.push_back({stage, std::chrono::duration<double>(
                                  std::chrono::steady_clock::now() - start)
                                  .count()});
      return result;
    } catch (const Error& e) {
      throw Error(e.kind(), std::string("stage '") + stage + "': " + e.what());
    }
  }

 private:
  std::vector<StageTiming>& sink_;
};

}  // namespace

TransferReport transfer(const Tensor& content_img, const Tensor& style_img,
                        const StyleTransferConfig& cfg) {
  if (content_img.rank() != 3) {
    fail(ErrorKind::dimension, "transfer: content image must be 3 x H x W");
  }
  return transfer(content_img, style_img, cfg,
                  ModelBundle::make(cfg, content_img.dim(1), content_img.dim(2)));
}

TransferReport transfer(const Tensor& content_img, const Tensor& style_img,
                        const StyleTransferConfig& cfg, const ModelBundle& models) {
  cfg.validate();
  if (content_img.shape() != style_img.shape()) {
    fail(ErrorKind::dimension, "transfer: content " + shape_string(content_img.shape()) +
                                   " and style " + shape_string(style_img.shape()) +
                                   " images must share a shape");
  }
  if (content_img.rank() != 3 || content_img.dim(1) != models.height ||
      content_img.dim(2) != models.width) {
    fail(ErrorKind::dimension, "transfer: models were built for " +
                                   std::to_string(models.height) + "x" +
                                   std::to_string(models.width) + " images");
  }

  TransferReport report;
  report.config = cfg;
  StageClock clock(report.timings);
  const NoisePredictor& denoiser = *models.denoiser;
  const NoiseSchedule sched = make_schedule(cfg.steps);
  const SpiConfig spi{cfg.enabled.spi ? cfg.spi_n : 0};
  const std::size_t dc = models.arch.context_dim;

  const Tensor z_content = clock.run("encode content", [&] { return encode(content_img, models.codec); });
  const Tensor z_style = clock.run("encode style", [&] { return encode(style_img, models.codec); });

  const ContextBundle content_ctx{text_tokens(cfg.prompt_content, 8, dc), {}, {}};
  const ContextBundle style_ctx{text_tokens(cfg.prompt_style, 8, dc), {}, {}};

  AttentionSnapshotStore store;
  report.style_trajectory = clock.run("style inversion", [&] {
    CaptureHook capture(store, cfg.injection);
    HookList hooks;
    if (cfg.enabled.sgsa) hooks.push_back(&capture);
    return invert(z_style, denoiser, style_ctx, spi, sched, hooks);
  });
  report.snapshots = store.size();
  report.content_trajectory = clock.run("content inversion", [&] {
    return invert(z_content, denoiser, content_ctx, spi, sched, {});
  });
  report.content_xT = report.content_trajectory.states.back();
  report.style_xT = report.style_trajectory.states.back();

  report.mixed_xT = clock.run("latent normalization", [&] {
    return cfg.enabled.ca_adain ? ca_adain(report.content_xT, report.style_xT, cfg.alpha)
                                : adain(report.content_xT, report.style_xT);
  });

  ContextBundle sample_ctx = content_ctx;
  if (cfg.enabled.dfca) {
    clock.run("image embedding", [&] {
      sample_ctx.content_tokens = extract_embedding(content_img, models.embedder);
      sample_ctx.style_tokens = extract_embedding(style_img, models.embedder);
      return 0;
    });
  }
  const Guidance guidance{cfg.guidance, ContextBundle{text_tokens("", 8, dc), {}, {}}};

  const Tensor z_out = clock.run("guided sampling", [&] {
    SgsaHook inject(store, cfg.injection);
    HookList hooks;
    if (cfg.enabled.sgsa) hooks.push_back(&inject);
    return sample(report.mixed_xT, denoiser, sample_ctx, guidance, sched, hooks);
  });
  report.stylized = clock.run("decode", [&] { return decode(z_out, models.codec); });

  report.content_reconstruction = clock.run("content round trip", [&] {
    return decode(sample(report.content_xT, denoiser, content_ctx, Guidance{}, sched, {}),
                  models.codec);
  });
  report.content_roundtrip_rms = recon_error(report.content_reconstruction, content_img);
  report.style_snapshots = std::move(store);
  return report;
}

std::vector<std::pair<std::string, StyleTransferConfig>> ablation_variants(
    const StyleTransferConfig& base) {
  std::vector<std::pair<std::string, StyleTransferConfig>> out;
  out.emplace_back("full", base);
  auto variant = [&](const char* label, bool MechanismSwitches::*flag) {
    StyleTransferConfig cfg = base;
    cfg.enabled.*flag = false;
    out.emplace_back(label, cfg);
  };
  variant("-SG-SA", &MechanismSwitches::sgsa);
  variant("-SPI", &MechanismSwitches::spi);
  variant("-CA-AdaIN", &MechanismSwitches::ca_adain);
  variant("-DF-CA", &MechanismSwitches::dfca);
  return out;
}

std::vector<std::pair<std::string, TransferReport>> ablation_suite(
    const Tensor& content_img, const Tensor& style_img, const StyleTransferConfig& base) {
  base.validate();
  if (content_img.rank() != 3) {
    fail(ErrorKind::dimension, "ablation: content image must be 3 x H x W");
  }
  const ModelBundle models = ModelBundle::make(base, content_img.dim(1), content_img.dim(2));
  std::vector<std::pair<std::string, TransferReport>> out;
  for (const auto& [label, cfg] : ablation_variants(base)) {
    try {
      out.emplace_back(label, transfer(content_img, style_img, cfg, models));
    } catch (const Error& e) {
      throw Error(e.kind(), "variant " + label + ": " + e.what());
    }
  }
  return out;
}

}  // namespace styleflow
