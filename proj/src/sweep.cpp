#include "sweep.hpp"

#include "config.hpp"
#include "errors.hpp"
#include "image_io.hpp"

namespace styleflow {

SweepAxis parse_sweep_axis(const std::string& name) {
  if (name == "alpha") return SweepAxis::alpha;
  if (name == "spi_n") return SweepAxis::spi_n;
  if (name == "blocks") return SweepAxis::blocks;
  if (name == "guidance") return SweepAxis::guidance;
  fail(ErrorKind::parameter, "sweep: unknown axis '" + name +
                                 "' (expected alpha, spi_n, blocks or guidance)");
}

const char* to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::alpha: return "alpha";
    case SweepAxis::spi_n: return "spi_n";
    case SweepAxis::blocks: return "blocks";
    case SweepAxis::guidance: return "guidance";
  }
  return "?";
}

std::vector<std::string> split_sweep_values(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  int depth = 0;
  for (char ch : text) {
    if (ch == '[') ++depth;
    if (ch == ']') --depth;
    if (ch == ',' && depth == 0) {
      out.push_back(item);
      item.clear();
    } else if (ch != ' ') {
      item += ch;
    }
  }
  if (depth != 0) fail(ErrorKind::parameter, "sweep: unbalanced brackets in '" + text + "'");
  out.push_back(item);
  return out;
}

std::vector<std::string> default_sweep_values(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::alpha: {
      std::vector<std::string> v;
      for (int i = 0; i <= 10; ++i) v.push_back(format_number(i / 10.0));
      return v;
    }
    case SweepAxis::spi_n: return {"0", "1", "2", "3", "5", "8"};
    case SweepAxis::blocks:
      return {"1", "2", "3", "4", "5", "6", "[5;6]", "[4;5;6]", "[3;4;5;6]", "[2;3;4;5;6]"};
    case SweepAxis::guidance: return {"1", "2", "3", "4", "5", "6", "7"};
  }
  return {};
}

namespace {

StyleTransferConfig point_config(const StyleTransferConfig& base, SweepAxis axis,
                                 const std::string& value) {
  StyleTransferConfig cfg = base;
  switch (axis) {
    case SweepAxis::alpha: apply_config_entry(cfg, "alpha_c", value); break;
    case SweepAxis::spi_n: apply_config_entry(cfg, "spi_n", value); break;
    case SweepAxis::blocks: apply_config_entry(cfg, "blocks", value); break;
    case SweepAxis::guidance: apply_config_entry(cfg, "guidance", value); break;
  }
  cfg.validate();
  return cfg;
}

}  // namespace

void SweepPlan::validate() const {
  if (values.empty()) fail(ErrorKind::parameter, "sweep: no values given");
  for (const std::string& v : values) {
    if (v.empty()) fail(ErrorKind::parameter, "sweep: empty value in list");
    point_config(StyleTransferConfig{}, axis, v);
  }
}

MetricsRow metrics_row(const std::string& label, const TransferReport& report,
                       const Tensor& style_img, const ExternalScores& externals) {
  const StyleTransferConfig& cfg = report.config;
  MetricsRow row;
  row.variant = label;
  row.alpha_c = cfg.alpha.alpha_c;
  row.alpha_s = cfg.alpha.alpha_s;
  row.spi_n = cfg.enabled.spi ? cfg.spi_n : 0;
  row.blocks = blocks_label(cfg.injection);
  row.guidance = cfg.guidance;
  row.recon_error = report.content_roundtrip_rms;
  row.style_moment_distance = style_moment_distance(report.stylized, style_img);
  row.fid = externals.fid;
  row.lpips = externals.lpips;
  return row;
}

std::vector<MetricsRow> run_sweep(const Tensor& content_img, const Tensor& style_img,
                                  const StyleTransferConfig& base, const SweepPlan& plan,
                                  const ExternalScores& externals) {
  plan.validate();
  base.validate();
  if (content_img.rank() != 3) fail(ErrorKind::dimension, "sweep: content must be 3 x H x W");
  const ModelBundle models = ModelBundle::make(base, content_img.dim(1), content_img.dim(2));
  std::vector<MetricsRow> rows;
  for (const std::string& value : plan.values) {
    const StyleTransferConfig cfg = point_config(base, plan.axis, value);
    const std::string label =
        plan.axis == SweepAxis::blocks ? blocks_label(cfg.injection) : value;
    rows.push_back(
        metrics_row(label, transfer(content_img, style_img, cfg, models), style_img, externals));
  }
  return rows;
}

void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows) {
  write_file_atomic(path, metrics_csv(rows));
}

}  // namespace styleflow
