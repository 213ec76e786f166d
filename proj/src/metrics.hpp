#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tensor.hpp"

namespace styleflow {

// (1 + LPIPS) * (1 + FID); both inputs must be non-negative.
double artfid(double fid, double lpips);

// Root-mean-square pixel difference.
double recon_error(const Tensor& a, const Tensor& b);

// L2 distance between the concatenated per-channel (mean, std) vectors.
double style_moment_distance(const Tensor& stylized, const Tensor& style);

struct MetricsRow {
  std::string variant;
  double alpha_c = 0.0;
  double alpha_s = 0.0;
  int spi_n = 0;
  std::string blocks;
  double guidance = 0.0;
  double recon_error = 0.0;
  double style_moment_distance = 0.0;
  std::optional<double> fid;
  std::optional<double> lpips;

  // Present exactly when both externals are.
  std::optional<double> artfid() const;
};

inline constexpr const char* kMetricsHeader =
    "variant,alpha_c,alpha_s,spi_n,blocks,guidance,recon_error,style_moment_distance,fid,"
    "lpips,artfid";

// Header plus one LF-terminated line per row, no quoting.
std::string metrics_csv(const std::vector<MetricsRow>& rows);

// Locale-independent "%.9g".
std::string format_number(double v);

}  // namespace styleflow
