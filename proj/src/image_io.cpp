#include "image_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "errors.hpp"

namespace styleflow {

namespace {

bool is_space(std::uint8_t ch) {
  return ch == ' ' || ch == '\n' || ch == '\r' || ch == '\t' || ch == '\v' || ch == '\f';
}

class HeaderReader {
 public:
  explicit HeaderReader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (is_space(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  unsigned long number(const char* what) {
    skip_space_and_comments();
    const std::size_t start = pos_;
    unsigned long value = 0;
    while (pos_ < bytes_.size() && bytes_[pos_] >= '0' && bytes_[pos_] <= '9') {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > 1'000'000) fail_at(start, std::string(what) + " is too large");
      ++pos_;
    }
    if (pos_ == start) fail_at(start, std::string("expected ") + what);
    if (pos_ == bytes_.size()) fail_at(pos_, std::string("file ends inside ") + what);
    return value;
  }

  [[noreturn]] void fail_at(std::size_t offset, const std::string& msg) const {
    fail(ErrorKind::parse, "ppm: " + msg + " at byte offset " + std::to_string(offset));
  }

  std::size_t pos_ = 0;

 private:
  const std::vector<std::uint8_t>& bytes_;
};

}  // namespace

Tensor decode_ppm(const std::vector<std::uint8_t>& bytes) {
  HeaderReader in(bytes);
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') {
    in.fail_at(0, "missing P6 magic");
  }
  in.pos_ = 2;
  const unsigned long width = in.number("width");
  const unsigned long height = in.number("height");
  const std::size_t maxval_offset = in.pos_;
  const unsigned long maxval = in.number("maxval");
  if (maxval != 255) {
    fail(ErrorKind::format, "ppm: unsupported maxval " + std::to_string(maxval) +
                                " at byte offset " + std::to_string(maxval_offset) +
                                " (only 255 is supported)");
  }
  if (in.pos_ >= bytes.size() || !is_space(bytes[in.pos_])) {
    in.fail_at(in.pos_, "expected a single whitespace byte after maxval");
  }
  ++in.pos_;
  if (width == 0 || height == 0) in.fail_at(2, "zero image dimension");
  const std::size_t pixels = width * height;
  if (bytes.size() - in.pos_ < 3 * pixels) {
    in.fail_at(bytes.size(), "truncated pixel data (expected " + std::to_string(3 * pixels) +
                                 " bytes)");
  }
  Tensor img({3, height, width});
  const std::uint8_t* p = bytes.data() + in.pos_;
  for (std::size_t y = 0; y < height; ++y)
    for (std::size_t x = 0; x < width; ++x)
      for (std::size_t c = 0; c < 3; ++c) img.at(c, y, x) = *p++ / 255.0;
  return img;
}

std::vector<std::uint8_t> encode_ppm(const Tensor& img) {
  if (img.rank() != 3 || img.dim(0) != 3) {
    fail(ErrorKind::dimension, "ppm: expected a 3 x H x W image, got " +
                                   shape_string(img.shape()));
  }
  const std::size_t height = img.dim(1), width = img.dim(2);
  const std::string header =
      "P6\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + 3 * width * height);
  for (std::size_t y = 0; y < height; ++y)
    for (std::size_t x = 0; x < width; ++x)
      for (std::size_t c = 0; c < 3; ++c) {
        const double v = std::clamp(img.at(c, y, x), 0.0, 1.0);
        out.push_back(static_cast<std::uint8_t>(std::lround(v * 255.0)));
      }
  return out;
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open '" + path + "' for reading");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::io, "cannot open '" + path + "' for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) {
      out.close();
      std::remove(tmp.c_str());
      fail(ErrorKind::io, "short write to '" + path + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::remove(tmp.c_str());
    fail(ErrorKind::io, "cannot move output into '" + path + "': " + ec.message());
  }
}

Tensor load_image(const std::string& path) {
  try {
    return decode_ppm(read_file(path));
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + e.what());
  }
}

void save_image(const std::string& path, const Tensor& img) {
  const std::vector<std::uint8_t> bytes = encode_ppm(img);
  write_file_atomic(path, std::string(bytes.begin(), bytes.end()));
}

}  // namespace styleflow
