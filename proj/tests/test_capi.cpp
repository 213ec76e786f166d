#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "styleflow/styleflow.h"

namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("styleflow_capi_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::vector<double> pattern(int w, int h, double phase) {
  std::vector<double> px(3 * static_cast<std::size_t>(w * h));
  for (std::size_t i = 0; i < px.size(); ++i) px[i] = 0.5 + 0.45 * std::sin(0.37 * i + phase);
  return px;
}

sf_image* make_image(int w, int h, double phase) {
  sf_image* img = nullptr;
  const auto px = pattern(w, h, phase);
  REQUIRE(sf_image_create(w, h, px.data(), &img) == SF_OK);
  return img;
}

sf_config* quick_config() {
  sf_config* cfg = nullptr;
  REQUIRE(sf_config_create(&cfg) == SF_OK);
  REQUIRE(sf_config_set(cfg, "T", "3") == SF_OK);
  REQUIRE(sf_config_set(cfg, "spi_n", "1") == SF_OK);
  return cfg;
}

}  // namespace

TEST_CASE("status strings and version") {
  CHECK(std::strcmp(sf_status_string(SF_OK), "ok") == 0);
  CHECK(std::strcmp(sf_status_string(SF_ERR_INJECTION_MISS), "injection miss") == 0);
  CHECK(std::strlen(sf_version()) > 0);
}

TEST_CASE("null arguments are rejected, destroy accepts null") {
  CHECK(sf_image_load(nullptr, nullptr) == SF_ERR_INVALID_ARGUMENT);
  CHECK(std::strlen(sf_last_error()) > 0);
  CHECK(sf_config_set(nullptr, "T", "3") == SF_ERR_INVALID_ARGUMENT);
  CHECK(sf_transfer(nullptr, nullptr, nullptr, nullptr) == SF_ERR_INVALID_ARGUMENT);
  CHECK(sf_image_width(nullptr) == 0);
  CHECK(sf_ablation_count(nullptr) == 0);
  CHECK(sf_ablation_label(nullptr, 0) == nullptr);
  sf_image_destroy(nullptr);
  sf_config_destroy(nullptr);
  sf_report_destroy(nullptr);
  sf_ablation_destroy(nullptr);
}

TEST_CASE("artfid through the C surface") {
  double v = 0.0;
  CHECK(sf_artfid(18.559, 0.467, &v) == SF_OK);
  CHECK(std::abs(v - 28.693) <= 1e-3);
  CHECK(sf_artfid(-1.0, 0.0, &v) == SF_ERR_PARAMETER);
  CHECK(std::string(sf_last_error()).find("non-negative") != std::string::npos);
}

TEST_CASE("image create, save, load and copy") {
  sf_image* img = make_image(4, 4, 0.0);
  CHECK(sf_image_width(img) == 4);
  CHECK(sf_image_height(img) == 4);
  const std::string path = (scratch_dir() / "a.ppm").string();
  CHECK(sf_image_save(img, path.c_str()) == SF_OK);
  sf_image* back = nullptr;
  CHECK(sf_image_load(path.c_str(), &back) == SF_OK);
  std::vector<double> a(48), b(48);
  CHECK(sf_image_copy_pixels(img, a.data(), a.size()) == SF_OK);
  CHECK(sf_image_copy_pixels(back, b.data(), b.size()) == SF_OK);
  for (std::size_t i = 0; i < 48; ++i) CHECK(std::abs(a[i] - b[i]) <= 1.0 / 510.0 + 1e-12);
  CHECK(sf_image_copy_pixels(img, a.data(), 47) == SF_ERR_INVALID_ARGUMENT);
  sf_image_destroy(img);
  sf_image_destroy(back);

  std::ofstream(scratch_dir() / "bad.ppm", std::ios::binary) << "P6\n4 4\n255\nxyz";
  sf_image* bad = nullptr;
  CHECK(sf_image_load((scratch_dir() / "bad.ppm").string().c_str(), &bad) == SF_ERR_PARSE);
  CHECK(bad == nullptr);
  CHECK(sf_image_load("/nonexistent.ppm", &bad) == SF_ERR_IO);
}

TEST_CASE("config keys and validation") {
  sf_config* cfg = nullptr;
  REQUIRE(sf_config_create(&cfg) == SF_OK);
  CHECK(sf_config_validate(cfg) == SF_OK);
  CHECK(sf_config_set(cfg, "alpha_c", "0.25") == SF_OK);
  CHECK(sf_config_set(cfg, "blocks", "[4;5;6]") == SF_OK);
  CHECK(sf_config_set(cfg, "wibble", "1") == SF_ERR_PARAMETER);
  CHECK(sf_config_set(cfg, "alpha_c", "1.5") == SF_OK);
  CHECK(sf_config_validate(cfg) == SF_ERR_PARAMETER);
  const std::string path = (scratch_dir() / "c.cfg").string();
  std::ofstream(path) << "T=4\nthis line is broken\n";
  CHECK(sf_config_load_file(cfg, path.c_str()) == SF_ERR_PARSE);
  sf_config_destroy(cfg);
}

TEST_CASE("transfer, metrics and errors") {
  sf_image* c = make_image(8, 8, 0.0);
  sf_image* s = make_image(8, 8, 1.0);
  sf_config* cfg = quick_config();
  sf_report* rep = nullptr;
  REQUIRE(sf_transfer(c, s, cfg, &rep) == SF_OK);
  size_t snaps = 0;
  CHECK(sf_report_snapshot_count(rep, &snaps) == SF_OK);
  CHECK(snaps == 6);
  double rms = -1.0;
  CHECK(sf_report_roundtrip_rms(rep, &rms) == SF_OK);
  CHECK(rms >= 0.0);
  sf_image* out = nullptr;
  CHECK(sf_report_stylized(rep, &out) == SF_OK);
  CHECK(sf_image_width(out) == 8);
  const sf_externals ext{1, 18.559, 1, 0.467};
  const std::string csv = (scratch_dir() / "m.csv").string();
  CHECK(sf_report_write_metrics(rep, s, "run", &ext, csv.c_str()) == SF_OK);
  std::ifstream in(csv);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  CHECK(header.rfind("variant,", 0) == 0);
  CHECK(row.rfind("run,", 0) == 0);
  CHECK(row.find(",18.559,0.467,28.693") != std::string::npos);

  sf_image* wide = make_image(16, 8, 0.0);
  sf_report* none = nullptr;
  CHECK(sf_transfer(c, wide, cfg, &none) == SF_ERR_DIMENSION);
  CHECK(none == nullptr);
  CHECK(std::string(sf_last_error()).find("share a shape") != std::string::npos);

  sf_image_destroy(out);
  sf_image_destroy(wide);
  sf_report_destroy(rep);
  sf_config_destroy(cfg);
  sf_image_destroy(c);
  sf_image_destroy(s);
}

TEST_CASE("ablation and sweep") {
  sf_image* c = make_image(8, 8, 0.0);
  sf_image* s = make_image(8, 8, 2.0);
  sf_config* cfg = quick_config();
  sf_ablation* ab = nullptr;
  REQUIRE(sf_ablate(c, s, cfg, &ab) == SF_OK);
  REQUIRE(sf_ablation_count(ab) == 5);
  const char* labels[] = {"full", "-SG-SA", "-SPI", "-CA-AdaIN", "-DF-CA"};
  for (int i = 0; i < 5; ++i) CHECK(std::strcmp(sf_ablation_label(ab, i), labels[i]) == 0);
  CHECK(sf_ablation_label(ab, 5) == nullptr);
  sf_image* img = nullptr;
  CHECK(sf_ablation_stylized(ab, 5, &img) == SF_ERR_INVALID_ARGUMENT);
  CHECK(sf_ablation_stylized(ab, 0, &img) == SF_OK);
  sf_image_destroy(img);
  const std::string csv = (scratch_dir() / "ab.csv").string();
  CHECK(sf_ablation_write_metrics(ab, s, nullptr, csv.c_str()) == SF_OK);
  sf_ablation_destroy(ab);

  const std::string sweep_csv = (scratch_dir() / "sweep.csv").string();
  CHECK(sf_sweep(c, s, cfg, "guidance", "1,2", nullptr, sweep_csv.c_str()) == SF_OK);
  std::ifstream in(sweep_csv);
  int n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  CHECK(n == 3);
  CHECK(sf_sweep(c, s, cfg, "colour", nullptr, nullptr, sweep_csv.c_str()) == SF_ERR_PARAMETER);
  CHECK(sf_sweep(c, s, cfg, "blocks", "9", nullptr, sweep_csv.c_str()) == SF_ERR_PARAMETER);
  sf_config_destroy(cfg);
  sf_image_destroy(c);
  sf_image_destroy(s);
}

TEST_CASE("selftest through the C surface") {
  int failures = -1, seen = 0;
  CHECK(sf_selftest([](const char*, int, const char*, void* user) { ++*static_cast<int*>(user); },
                    &seen, &failures) == SF_OK);
  CHECK(failures == 0);
  CHECK(seen >= 7);
}
