#pragma once

#include "splat2d/core.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>

namespace splat2d {

class ImageIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Binary P6 bytes: "P6\n<w> <h>\n255\n", then w*h RGB triplets, row-major
/// from the top-left, each value round(clamp(c, 0, 1) * 255). Values are
/// written as-is (no gamma). One-channel images are replicated to gray.
std::string encode_ppm(const Image& image);
void write_ppm(const Image& image, const std::filesystem::path& path);

/// Reads 8-bit P6 (maxval 255) into a 3-channel image with values in [0, 1].
Image decode_ppm(const std::string& bytes);
Image read_ppm(const std::filesystem::path& path);

/// Maps covered depths linearly to [0, 1] (near = 0); uncovered pixels are 1.
Image depth_to_display(const Image& depth, const Image& alpha);
/// Maps normal components from [-1, 1] to [0, 1].
Image normal_to_display(const Image& normal);

}  // namespace splat2d
