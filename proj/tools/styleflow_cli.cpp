// styleflow command-line front end. Talks to the engine only through the C API.
//
// Exit codes: 0 success, 1 usage error, 2 runtime error.

#include <CLI11.hpp>

#include <cctype>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "styleflow/styleflow.h"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

struct RuntimeFailure {
  sf_status status;
  std::string context;
  bool usage = false;
};

void check(sf_status status, const std::string& context) {
  if (status != SF_OK) throw RuntimeFailure{status, context};
}

template <typename T, void (*Destroy)(T*)>
struct Deleter {
  void operator()(T* p) const { Destroy(p); }
};
using ImagePtr = std::unique_ptr<sf_image, Deleter<sf_image, sf_image_destroy>>;
using ConfigPtr = std::unique_ptr<sf_config, Deleter<sf_config, sf_config_destroy>>;
using ReportPtr = std::unique_ptr<sf_report, Deleter<sf_report, sf_report_destroy>>;
using AblationPtr = std::unique_ptr<sf_ablation, Deleter<sf_ablation, sf_ablation_destroy>>;

// Options shared by transfer, ablate and sweep. Flags are applied after the
// optional --config file so they take precedence.
struct CommonOptions {
  std::string content, style, config_file;
  std::vector<std::pair<std::string, std::string>> overrides;
  double fid = 0.0, lpips = 0.0;
  CLI::Option* fid_opt = nullptr;
  CLI::Option* lpips_opt = nullptr;

  void add_to(CLI::App& app) {
    app.add_option("--content", content, "Content image (binary PPM)")->required();
    app.add_option("--style", style, "Style image (binary PPM)")->required();
    app.add_option("--config", config_file, "key=value configuration file");
    keyed(app, "--alpha-c", "alpha_c", "Content weight alpha_c (alpha_s = 1 - alpha_c)");
    keyed(app, "--spi-n", "spi_n", "Inversion refinement iterations");
    keyed(app, "--blocks", "blocks", "Injection blocks, e.g. 5,6 or [4;5;6]");
    keyed(app, "--guidance", "guidance", "Classifier-free guidance scale");
    keyed(app, "--seed", "seed", "Seed for weights, codec and embedder");
    keyed(app, "--steps", "T", "Number of diffusion steps T");
    keyed(app, "--prompt-content", "prompt_content", "Content prompt");
    keyed(app, "--prompt-style", "prompt_style", "Style prompt");
    keyed(app, "--denoiser", "denoiser", "toy or linear");
    flag(app, "--no-sgsa", "sgsa", "Disable style-guided self-attention");
    flag(app, "--no-spi", "spi", "Disable fixed-point inversion refinement");
    flag(app, "--no-ca-adain", "ca_adain", "Use plain AdaIN for the initial noise");
    flag(app, "--no-dfca", "dfca", "Disable dual-feature cross-attention");
    fid_opt = app.add_option("--fid", fid, "External FID score for the ArtFID column");
    lpips_opt = app.add_option("--lpips", lpips, "External LPIPS score for the ArtFID column");
  }

  void keyed(CLI::App& app, const char* flag_name, const char* key, const char* help) {
    app.add_option_function<std::string>(
        flag_name, [this, key](const std::string& v) { overrides.emplace_back(key, v); }, help);
  }

  void flag(CLI::App& app, const char* flag_name, const char* key, const char* help) {
    app.add_flag_callback(flag_name, [this, key] { overrides.emplace_back(key, "false"); },
                          help);
  }

  // Bad option values count as usage errors, an unreadable file as runtime.
  ConfigPtr build_config() const {
    try {
      return build_config_unchecked();
    } catch (RuntimeFailure& f) {
      f.usage = f.status == SF_ERR_PARAMETER || f.status == SF_ERR_PARSE;
      throw;
    }
  }

  ConfigPtr build_config_unchecked() const {
    sf_config* raw = nullptr;
    check(sf_config_create(&raw), "config");
    ConfigPtr cfg(raw);
    if (!config_file.empty()) check(sf_config_load_file(cfg.get(), config_file.c_str()), "config");
    for (const auto& [key, value] : overrides) {
      check(sf_config_set(cfg.get(), key.c_str(), value.c_str()), "--" + key);
    }
    check(sf_config_validate(cfg.get()), "config");
    return cfg;
  }

  sf_externals externals() const {
    return sf_externals{fid_opt->count() > 0, fid, lpips_opt->count() > 0, lpips};
  }

  std::pair<ImagePtr, ImagePtr> load_images() const {
    sf_image* c = nullptr;
    sf_image* s = nullptr;
    check(sf_image_load(content.c_str(), &c), "--content");
    ImagePtr content_img(c);
    check(sf_image_load(style.c_str(), &s), "--style");
    return {std::move(content_img), ImagePtr(s)};
  }
};

int run_transfer(const CommonOptions& opts, const std::string& out, const std::string& metrics) {
  const ConfigPtr cfg = opts.build_config();
  const auto [content, style] = opts.load_images();
  sf_report* raw = nullptr;
  check(sf_transfer(content.get(), style.get(), cfg.get(), &raw), "transfer");
  const ReportPtr report(raw);
  sf_image* img = nullptr;
  check(sf_report_stylized(report.get(), &img), "transfer");
  const ImagePtr stylized(img);
  check(sf_image_save(stylized.get(), out.c_str()), "--out");
  if (!metrics.empty()) {
    const sf_externals ext = opts.externals();
    check(sf_report_write_metrics(report.get(), style.get(), "transfer", &ext, metrics.c_str()),
          "--metrics");
  }
  return 0;
}

std::string variant_file_name(const std::string& label) {
  std::string name;
  for (char ch : label) {
    if (ch == '-') {
      if (name.empty()) name = "no";
      name += '-';
    } else {
      name += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    }
  }
  return name + ".ppm";
}

int run_ablate(const CommonOptions& opts, const std::string& out_dir, std::string metrics) {
  const ConfigPtr cfg = opts.build_config();
  const auto [content, style] = opts.load_images();
  sf_ablation* raw = nullptr;
  check(sf_ablate(content.get(), style.get(), cfg.get(), &raw), "ablate");
  const AblationPtr ablation(raw);

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    std::cerr << "error: cannot create output directory '" << out_dir << "': " << ec.message()
              << "\n";
    return kExitRuntime;
  }
  std::vector<ImagePtr> images;
  for (int i = 0; i < sf_ablation_count(ablation.get()); ++i) {
    sf_image* img = nullptr;
    check(sf_ablation_stylized(ablation.get(), i, &img), "ablate");
    images.emplace_back(img);
  }
  for (int i = 0; i < sf_ablation_count(ablation.get()); ++i) {
    const std::string path =
        (std::filesystem::path(out_dir) / variant_file_name(sf_ablation_label(ablation.get(), i)))
            .string();
    check(sf_image_save(images[static_cast<std::size_t>(i)].get(), path.c_str()), path);
  }
  if (metrics.empty()) metrics = (std::filesystem::path(out_dir) / "metrics.csv").string();
  const sf_externals ext = opts.externals();
  check(sf_ablation_write_metrics(ablation.get(), style.get(), &ext, metrics.c_str()),
        "--metrics");
  return 0;
}

int run_sweep(const CommonOptions& opts, const std::string& axis, const std::string& values,
              const std::string& out) {
  const ConfigPtr cfg = opts.build_config();
  const auto [content, style] = opts.load_images();
  const sf_externals ext = opts.externals();
  const sf_status status = sf_sweep(content.get(), style.get(), cfg.get(), axis.c_str(),
                                    values.empty() ? nullptr : values.c_str(), &ext, out.c_str());
  // A rejected axis or value list is a usage error.
  if (status == SF_ERR_PARAMETER || status == SF_ERR_PARSE) {
    throw RuntimeFailure{status, "--axis/--values", true};
  }
  check(status, "sweep");
  return 0;
}

int run_selftest() {
  int failures = 0;
  check(sf_selftest(
            [](const char* name, int passed, const char* detail, void*) {
              std::printf("[%s] %s (%s)\n", passed ? "PASS" : "FAIL", name, detail);
            },
            nullptr, &failures),
        "selftest");
  std::printf("%d check(s) failed\n", failures);
  return failures == 0 ? 0 : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"styleflow: training-free diffusion style transfer at desk scale"};
  app.require_subcommand(1);

  CommonOptions transfer_opts, ablate_opts, sweep_opts;
  std::string transfer_out, transfer_metrics, ablate_dir, ablate_metrics, sweep_axis,
      sweep_values, sweep_out;

  CLI::App* transfer = app.add_subcommand("transfer", "Stylize one content image");
  transfer_opts.add_to(*transfer);
  transfer->add_option("--out", transfer_out, "Output image (binary PPM)")->required();
  transfer->add_option("--metrics", transfer_metrics, "Optional one-row metrics CSV");

  CLI::App* ablate = app.add_subcommand("ablate", "Run the five ablation variants");
  ablate_opts.add_to(*ablate);
  ablate->add_option("--out-dir", ablate_dir, "Directory for the variant images")->required();
  ablate->add_option("--metrics", ablate_metrics, "Metrics CSV (default <out-dir>/metrics.csv)");

  CLI::App* sweep = app.add_subcommand("sweep", "Sweep one parameter and write metrics CSV");
  sweep_opts.add_to(*sweep);
  sweep->add_option("--axis", sweep_axis, "alpha, spi_n, blocks or guidance")->required();
  sweep->add_option("--values", sweep_values, "Comma-separated values (default per axis)");
  sweep->add_option("--out", sweep_out, "Output CSV")->required();

  CLI::App* selftest = app.add_subcommand("selftest", "Run the built-in oracle checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    std::cerr << (subs.empty() ? app.help() : subs.front()->help());
    return kExitUsage;
  }

  try {
    if (transfer->parsed()) return run_transfer(transfer_opts, transfer_out, transfer_metrics);
    if (ablate->parsed()) return run_ablate(ablate_opts, ablate_dir, ablate_metrics);
    if (sweep->parsed()) return run_sweep(sweep_opts, sweep_axis, sweep_values, sweep_out);
    if (selftest->parsed()) return run_selftest();
  } catch (const RuntimeFailure& f) {
    std::cerr << "error: " << f.context << ": " << sf_status_string(f.status) << ": "
              << sf_last_error() << "\n";
    if (f.usage) {
      const auto subs = app.get_subcommands();
      std::cerr << "\n" << (subs.empty() ? app.help() : subs.front()->help());
      return kExitUsage;
    }
    return kExitRuntime;
  }
  return kExitUsage;
}
