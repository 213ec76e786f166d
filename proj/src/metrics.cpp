#include "metrics.hpp"

#include <cmath>
#include <cstdio>

#include "errors.hpp"

namespace styleflow {

double artfid(double fid, double lpips) {
  if (!(fid >= 0.0) || !(lpips >= 0.0)) {
    fail(ErrorKind::parameter, "artfid: FID and LPIPS must be non-negative");
  }
  return (1.0 + lpips) * (1.0 + fid);
}

double recon_error(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "recon_error");
  if (a.empty()) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(acc / static_cast<double>(a.size()));
}

double style_moment_distance(const Tensor& stylized, const Tensor& style) {
  if (stylized.rank() != 3 || style.rank() != 3 || stylized.dim(0) != style.dim(0)) {
    fail(ErrorKind::dimension, "style_moment_distance: channel mismatch " +
                                   shape_string(stylized.shape()) + " vs " +
                                   shape_string(style.shape()));
  }
  const ChannelMoments a = channel_moments(stylized);
  const ChannelMoments b = channel_moments(style);
  double acc = 0.0;
  for (std::size_t c = 0; c < a.mean.size(); ++c) {
    acc += (a.mean[c] - b.mean[c]) * (a.mean[c] - b.mean[c]);
    acc += (a.std[c] - b.std[c]) * (a.std[c] - b.std[c]);
  }
  return std::sqrt(acc);
}

std::optional<double> MetricsRow::artfid() const {
  if (fid && lpips) return styleflow::artfid(*fid, *lpips);
  return std::nullopt;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string metrics_csv(const std::vector<MetricsRow>& rows) {
  std::string out = kMetricsHeader;
  out += '\n';
  auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
  for (const MetricsRow& r : rows) {
    out += r.variant + ',' + format_number(r.alpha_c) + ',' + format_number(r.alpha_s) + ',' +
           std::to_string(r.spi_n) + ',' + r.blocks + ',' + format_number(r.guidance) + ',' +
           format_number(r.recon_error) + ',' + format_number(r.style_moment_distance) + ',' +
           opt(r.fid) + ',' + opt(r.lpips) + ',' + opt(r.artfid()) + '\n';
  }
  return out;
}

}  // namespace styleflow
