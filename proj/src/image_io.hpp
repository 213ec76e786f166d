#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tensor.hpp"

namespace styleflow {

// Binary PPM (P6, maxval 255). Decoded images are [3 x H x W] with values
// byte / 255.
Tensor decode_ppm(const std::vector<std::uint8_t>& bytes);
// Writes exactly "P6\n<w> <h>\n255\n" followed by interleaved RGB bytes;
// values are clamped to [0, 1] and rounded to the nearest byte.
std::vector<std::uint8_t> encode_ppm(const Tensor& img);

Tensor load_image(const std::string& path);
// Writes to a temporary sibling and renames, so a failure never leaves a
// partial file at `path`.
void save_image(const std::string& path, const Tensor& img);

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file_atomic(const std::string& path, const std::string& contents);

}  // namespace styleflow
