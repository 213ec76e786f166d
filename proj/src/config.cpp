#include "config.hpp"

#include <charconv>
#include <cstdlib>

#include "errors.hpp"
#include "image_io.hpp"

namespace styleflow {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_real(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (value.empty() || end != value.c_str() + value.size()) {
    fail(ErrorKind::parameter, "config: '" + key + "' expects a number, got '" + value + "'");
  }
  return v;
}

long long parse_integer(const std::string& key, const std::string& value) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (value.empty() || ec != std::errc() || ptr != value.data() + value.size()) {
    fail(ErrorKind::parameter, "config: '" + key + "' expects an integer, got '" + value + "'");
  }
  return v;
}

std::uint64_t parse_seed(const std::string& key, const std::string& value) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (value.empty() || ec != std::errc() || ptr != value.data() + value.size()) {
    fail(ErrorKind::parameter, "config: '" + key + "' expects an unsigned seed, got '" + value +
                                   "'");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true" || value == "on" || value == "yes") return true;
  if (value == "0" || value == "false" || value == "off" || value == "no") return false;
  fail(ErrorKind::parameter, "config: '" + key + "' expects a boolean, got '" + value + "'");
}

}  // namespace

void apply_config_entry(StyleTransferConfig& cfg, const std::string& key,
                        const std::string& value) {
  if (key == "T" || key == "steps") {
    cfg.steps = static_cast<int>(parse_integer(key, value));
  } else if (key == "spi_n") {
    cfg.spi_n = static_cast<int>(parse_integer(key, value));
  } else if (key == "alpha_c") {
    cfg.alpha = CaAdainParams::from_content_weight(parse_real(key, value));
  } else if (key == "alpha_s") {
    const double s = parse_real(key, value);
    cfg.alpha = CaAdainParams{1.0 - s, s};
  } else if (key == "blocks") {
    cfg.injection = parse_blocks(value);
  } else if (key == "guidance") {
    cfg.guidance = parse_real(key, value);
  } else if (key == "prompt_content") {
    cfg.prompt_content = value;
  } else if (key == "prompt_style") {
    cfg.prompt_style = value;
  } else if (key == "seed") {
    const std::uint64_t s = parse_seed(key, value);
    cfg.seeds = Seeds{s, s, s};
  } else if (key == "seed_weights") {
    cfg.seeds.weights = parse_seed(key, value);
  } else if (key == "seed_codec") {
    cfg.seeds.codec = parse_seed(key, value);
  } else if (key == "seed_embedder") {
    cfg.seeds.embedder = parse_seed(key, value);
  } else if (key == "sgsa") {
    cfg.enabled.sgsa = parse_bool(key, value);
  } else if (key == "spi") {
    cfg.enabled.spi = parse_bool(key, value);
  } else if (key == "ca_adain") {
    cfg.enabled.ca_adain = parse_bool(key, value);
  } else if (key == "dfca") {
    cfg.enabled.dfca = parse_bool(key, value);
  } else if (key == "denoiser") {
    if (value == "toy") cfg.denoiser = DenoiserKind::toy;
    else if (value == "linear") cfg.denoiser = DenoiserKind::linear;
    else fail(ErrorKind::parameter, "config: denoiser must be 'toy' or 'linear'");
  } else {
    fail(ErrorKind::parameter, "config: unknown key '" + key + "'");
  }
}

void apply_config_text(StyleTransferConfig& cfg, const std::string& text) {
  std::size_t line_no = 0, start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      fail(ErrorKind::parse, "config line " + std::to_string(line_no) + ": expected key=value");
    }
    try {
      apply_config_entry(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const Error& e) {
      throw Error(e.kind(), "config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void apply_config_file(StyleTransferConfig& cfg, const std::string& path) {
  const std::vector<std::uint8_t> bytes = read_file(path);
  apply_config_text(cfg, std::string(bytes.begin(), bytes.end()));
}

}  // namespace styleflow
