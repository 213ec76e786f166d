#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "codec.hpp"
#include "denoiser.hpp"
#include "diffusion.hpp"
#include "style_control.hpp"

namespace styleflow {

enum class DenoiserKind { toy, linear };

struct Seeds {
  std::uint64_t weights = 0;
  std::uint64_t codec = 0;
  std::uint64_t embedder = 0;
};

struct MechanismSwitches {
  bool sgsa = true;
  bool spi = true;
  bool ca_adain = true;  // false: plain AdaIN
  bool dfca = true;
};

struct StyleTransferConfig {
  int steps = 20;
  int spi_n = 5;
  CaAdainParams alpha{};
  InjectionConfig injection = InjectionConfig::default_blocks();
  double guidance = 3.0;
  std::string prompt_content;
  std::string prompt_style;
  Seeds seeds{};
  MechanismSwitches enabled{};
  DenoiserKind denoiser = DenoiserKind::toy;

  void validate() const;
};

// Everything that depends only on seeds and image size; built once and
// shared read-only between transfers.
struct ModelBundle {
  CodecWeights codec;
  EmbedderWeights embedder;
  ArchitectureConfig arch;
  std::shared_ptr<const NoisePredictor> denoiser;
  std::size_t height = 0;
  std::size_t width = 0;

  static ModelBundle make(const StyleTransferConfig& cfg, std::size_t height,
                          std::size_t width);
};

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct TransferReport {
  Tensor stylized;        // [3 x H x W] in [0, 1]
  Tensor content_xT;
  Tensor style_xT;
  Tensor mixed_xT;        // initial noise after (CA-)AdaIN
  LatentTrajectory content_trajectory;
  LatentTrajectory style_trajectory;
  // decode(sample(x_T^c)) against the content image, unguided and unhooked.
  Tensor content_reconstruction;
  double content_roundtrip_rms = 0.0;
  std::size_t snapshots = 0;
  // Style (K, V) captured during the style inversion.
  AttentionSnapshotStore style_snapshots;
  std::vector<StageTiming> timings;
  StyleTransferConfig config;
};

TransferReport transfer(const Tensor& content_img, const Tensor& style_img,
                        const StyleTransferConfig& cfg);
TransferReport transfer(const Tensor& content_img, const Tensor& style_img,
                        const StyleTransferConfig& cfg, const ModelBundle& models);

// Fixed order: full, -SG-SA, -SPI, -CA-AdaIN, -DF-CA.
std::vector<std::pair<std::string, StyleTransferConfig>> ablation_variants(
    const StyleTransferConfig& base);

std::vector<std::pair<std::string, TransferReport>> ablation_suite(
    const Tensor& content_img, const Tensor& style_img, const StyleTransferConfig& base);

}  // namespace styleflow
