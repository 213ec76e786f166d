#pragma once

#include <optional>
#include <string>
#include <vector>

#include "metrics.hpp"
#include "pipeline.hpp"

namespace styleflow {

enum class SweepAxis { alpha, spi_n, blocks, guidance };

SweepAxis parse_sweep_axis(const std::string& name);
const char* to_string(SweepAxis axis);

struct SweepPlan {
  SweepAxis axis = SweepAxis::alpha;
  // alpha: alpha_c values; spi_n: integers; guidance: reals; blocks: block
  // set labels such as "5" or "[5;6]".
  std::vector<std::string> values;

  void validate() const;
};

// Comma-separated, commas inside [...] do not split.
std::vector<std::string> split_sweep_values(const std::string& text);

// alpha: 0, 0.1, .., 1; spi_n: 0,1,2,3,5,8; blocks: the ten injection rows
// 1..6, [5;6], [4;5;6], [3;4;5;6], [2;3;4;5;6]; guidance: 1..7.
std::vector<std::string> default_sweep_values(SweepAxis axis);

struct ExternalScores {
  std::optional<double> fid;
  std::optional<double> lpips;
};

MetricsRow metrics_row(const std::string& label, const TransferReport& report,
                       const Tensor& style_img, const ExternalScores& externals);

// One row per value, in the given order.
std::vector<MetricsRow> run_sweep(const Tensor& content_img, const Tensor& style_img,
                                  const StyleTransferConfig& base, const SweepPlan& plan,
                                  const ExternalScores& externals = {});

void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows);

}  // namespace styleflow
