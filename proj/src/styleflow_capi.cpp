#include "styleflow/styleflow.h"

#include <exception>
#include <new>
#include <string>

#include "config.hpp"
#include "errors.hpp"
#include "image_io.hpp"
#include "metrics.hpp"
#include "pipeline.hpp"
#include "selftest.hpp"
#include "sweep.hpp"

struct sf_image {
  styleflow::Tensor pixels;
};

struct sf_config {
  styleflow::StyleTransferConfig cfg;
};

struct sf_report {
  styleflow::TransferReport report;
};

struct sf_ablation {
  std::vector<std::pair<std::string, styleflow::TransferReport>> variants;
};

namespace {

thread_local std::string g_last_error;

sf_status status_for(styleflow::ErrorKind kind) {
  using styleflow::ErrorKind;
  switch (kind) {
    case ErrorKind::dimension: return SF_ERR_DIMENSION;
    case ErrorKind::parameter: return SF_ERR_PARAMETER;
    case ErrorKind::hook_contract: return SF_ERR_HOOK_CONTRACT;
    case ErrorKind::capture_conflict: return SF_ERR_CAPTURE_CONFLICT;
    case ErrorKind::injection_miss: return SF_ERR_INJECTION_MISS;
    case ErrorKind::parse: return SF_ERR_PARSE;
    case ErrorKind::format: return SF_ERR_FORMAT;
    case ErrorKind::io: return SF_ERR_IO;
  }
  return SF_ERR_INTERNAL;
}

sf_status invalid(const char* what) {
  g_last_error = std::string("invalid argument: ") + what;
  return SF_ERR_INVALID_ARGUMENT;
}

template <typename Fn>
sf_status guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    fn();
    return SF_OK;
  } catch (const styleflow::Error& e) {
    g_last_error = e.what();
    return status_for(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return SF_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SF_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown exception";
    return SF_ERR_INTERNAL;
  }
}

styleflow::ExternalScores to_scores(const sf_externals* ext) {
  styleflow::ExternalScores s;
  if (ext != nullptr) {
    if (ext->has_fid) s.fid = ext->fid;
    if (ext->has_lpips) s.lpips = ext->lpips;
  }
  return s;
}

}  // namespace

extern "C" {

const char* sf_version(void) { return "0.1.0"; }

const char* sf_status_string(sf_status status) {
  switch (status) {
    case SF_OK: return "ok";
    case SF_ERR_INVALID_ARGUMENT: return "invalid argument";
    case SF_ERR_DIMENSION: return "dimension error";
    case SF_ERR_PARAMETER: return "parameter error";
    case SF_ERR_HOOK_CONTRACT: return "hook contract error";
    case SF_ERR_CAPTURE_CONFLICT: return "capture conflict";
    case SF_ERR_INJECTION_MISS: return "injection miss";
    case SF_ERR_PARSE: return "parse error";
    case SF_ERR_FORMAT: return "format error";
    case SF_ERR_IO: return "I/O error";
    case SF_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* sf_last_error(void) { return g_last_error.c_str(); }

sf_status sf_image_load(const char* path, sf_image** out) {
  if (path == nullptr || out == nullptr) return invalid("path/out");
  *out = nullptr;
  return guarded([&] { *out = new sf_image{styleflow::load_image(path)}; });
}

sf_status sf_image_create(int width, int height, const double* planar, sf_image** out) {
  if (planar == nullptr || out == nullptr || width <= 0 || height <= 0) {
    return invalid("width/height/planar/out");
  }
  *out = nullptr;
  return guarded([&] {
    const std::size_t n = 3 * static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    *out = new sf_image{styleflow::Tensor(
        {3, static_cast<std::size_t>(height), static_cast<std::size_t>(width)},
        std::vector<double>(planar, planar + n))};
  });
}

sf_status sf_image_save(const sf_image* image, const char* path) {
  if (image == nullptr || path == nullptr) return invalid("image/path");
  return guarded([&] { styleflow::save_image(path, image->pixels); });
}

int sf_image_width(const sf_image* image) {
  return image ? static_cast<int>(image->pixels.dim(2)) : 0;
}

int sf_image_height(const sf_image* image) {
  return image ? static_cast<int>(image->pixels.dim(1)) : 0;
}

sf_status sf_image_copy_pixels(const sf_image* image, double* out, size_t count) {
  if (image == nullptr || out == nullptr) return invalid("image/out");
  if (count < image->pixels.size()) return invalid("count too small");
  std::copy(image->pixels.data().begin(), image->pixels.data().end(), out);
  return SF_OK;
}

void sf_image_destroy(sf_image* image) { delete image; }

sf_status sf_config_create(sf_config** out) {
  if (out == nullptr) return invalid("out");
  *out = nullptr;
  return guarded([&] { *out = new sf_config{}; });
}

sf_status sf_config_set(sf_config* config, const char* key, const char* value) {
  if (config == nullptr || key == nullptr || value == nullptr) return invalid("config/key/value");
  return guarded([&] { styleflow::apply_config_entry(config->cfg, key, value); });
}

sf_status sf_config_load_file(sf_config* config, const char* path) {
  if (config == nullptr || path == nullptr) return invalid("config/path");
  return guarded([&] { styleflow::apply_config_file(config->cfg, path); });
}

sf_status sf_config_validate(const sf_config* config) {
  if (config == nullptr) return invalid("config");
  return guarded([&] { config->cfg.validate(); });
}

void sf_config_destroy(sf_config* config) { delete config; }

sf_status sf_transfer(const sf_image* content, const sf_image* style, const sf_config* config,
                      sf_report** out) {
  if (!content || !style || !config || !out) return invalid("content/style/config/out");
  *out = nullptr;
  return guarded([&] {
    *out = new sf_report{styleflow::transfer(content->pixels, style->pixels, config->cfg)};
  });
}

sf_status sf_report_stylized(const sf_report* report, sf_image** out) {
  if (report == nullptr || out == nullptr) return invalid("report/out");
  *out = nullptr;
  return guarded([&] { *out = new sf_image{report->report.stylized}; });
}

sf_status sf_report_roundtrip_rms(const sf_report* report, double* out) {
  if (report == nullptr || out == nullptr) return invalid("report/out");
  *out = report->report.content_roundtrip_rms;
  return SF_OK;
}

sf_status sf_report_snapshot_count(const sf_report* report, size_t* out) {
  if (report == nullptr || out == nullptr) return invalid("report/out");
  *out = report->report.snapshots;
  return SF_OK;
}

sf_status sf_report_write_metrics(const sf_report* report, const sf_image* style,
                                  const char* label, const sf_externals* externals,
                                  const char* csv_path) {
  if (!report || !style || !label || !csv_path) return invalid("report/style/label/path");
  return guarded([&] {
    styleflow::write_metrics_csv(
        csv_path, {styleflow::metrics_row(label, report->report, style->pixels,
                                          to_scores(externals))});
  });
}

void sf_report_destroy(sf_report* report) { delete report; }

sf_status sf_ablate(const sf_image* content, const sf_image* style, const sf_config* config,
                    sf_ablation** out) {
  if (!content || !style || !config || !out) return invalid("content/style/config/out");
  *out = nullptr;
  return guarded([&] {
    *out = new sf_ablation{
        styleflow::ablation_suite(content->pixels, style->pixels, config->cfg)};
  });
}

int sf_ablation_count(const sf_ablation* ablation) {
  return ablation ? static_cast<int>(ablation->variants.size()) : 0;
}

const char* sf_ablation_label(const sf_ablation* ablation, int index) {
  if (ablation == nullptr || index < 0 ||
      index >= static_cast<int>(ablation->variants.size())) {
    return nullptr;
  }
  return ablation->variants[static_cast<std::size_t>(index)].first.c_str();
}

sf_status sf_ablation_stylized(const sf_ablation* ablation, int index, sf_image** out) {
  if (ablation == nullptr || out == nullptr) return invalid("ablation/out");
  if (index < 0 || index >= static_cast<int>(ablation->variants.size())) {
    return invalid("variant index out of range");
  }
  *out = nullptr;
  return guarded([&] {
    *out = new sf_image{ablation->variants[static_cast<std::size_t>(index)].second.stylized};
  });
}

sf_status sf_ablation_write_metrics(const sf_ablation* ablation, const sf_image* style,
                                    const sf_externals* externals, const char* csv_path) {
  if (!ablation || !style || !csv_path) return invalid("ablation/style/path");
  return guarded([&] {
    std::vector<styleflow::MetricsRow> rows;
    for (const auto& [label, report] : ablation->variants) {
      rows.push_back(styleflow::metrics_row(label, report, style->pixels, to_scores(externals)));
    }
    styleflow::write_metrics_csv(csv_path, rows);
  });
}

void sf_ablation_destroy(sf_ablation* ablation) { delete ablation; }

sf_status sf_sweep(const sf_image* content, const sf_image* style, const sf_config* config,
                   const char* axis, const char* values, const sf_externals* externals,
                   const char* csv_path) {
  if (!content || !style || !config || !axis || !csv_path) {
    return invalid("content/style/config/axis/path");
  }
  return guarded([&] {
    styleflow::SweepPlan plan;
    plan.axis = styleflow::parse_sweep_axis(axis);
    plan.values = values ? styleflow::split_sweep_values(values)
                         : styleflow::default_sweep_values(plan.axis);
    const auto rows = styleflow::run_sweep(content->pixels, style->pixels, config->cfg, plan,
                                           to_scores(externals));
    styleflow::write_metrics_csv(csv_path, rows);
  });
}

sf_status sf_artfid(double fid, double lpips, double* out) {
  if (out == nullptr) return invalid("out");
  return guarded([&] { *out = styleflow::artfid(fid, lpips); });
}

sf_status sf_selftest(sf_selftest_callback callback, void* user, int* failures) {
  return guarded([&] {
    int failed = 0;
    for (const auto& r : styleflow::run_selftest()) {
      if (!r.passed) ++failed;
      if (callback) callback(r.name.c_str(), r.passed ? 1 : 0, r.detail.c_str(), user);
    }
    if (failures) *failures = failed;
  });
}

}  // extern "C"
