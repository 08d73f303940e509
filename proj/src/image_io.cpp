#include "splat2d/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>

namespace splat2d {

std::string encode_ppm(const Image& image) {
  if (image.channels != 1 && image.channels != 3)
    throw ImageIoError("PPM output needs a 1- or 3-channel image");
  std::string out = "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) +
                    "\n255\n";
  out.reserve(out.size() + image.pixel_count() * 3);
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x)
      for (int c = 0; c < 3; ++c) {
        const double v = image.at(x, y, image.channels == 3 ? c : 0);
        const double clamped = std::isnan(v) ? 0.0 : std::clamp(v, 0.0, 1.0);
        out.push_back(char(static_cast<unsigned char>(std::lround(clamped * 255.0))));
      }
  return out;
}

void write_ppm(const Image& image, const std::filesystem::path& path) {
  const std::string bytes = encode_ppm(image);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ImageIoError(path.string() + ": cannot open for writing");
  out.write(bytes.data(), std::streamsize(bytes.size()));
  if (!out) throw ImageIoError(path.string() + ": write failed");
}

namespace {

// Reads one header token, skipping whitespace and '#' comments.
std::string next_token(const std::string& bytes, std::size_t& pos) {
  for (;;) {
    while (pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    if (pos < bytes.size() && bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  const std::size_t start = pos;
  while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
  return bytes.substr(start, pos - start);
}

int header_int(const std::string& bytes, std::size_t& pos, const char* what) {
  const std::string tok = next_token(bytes, pos);
  if (tok.empty() || !std::all_of(tok.begin(), tok.end(), ::isdigit) || tok.size() > 9)
    throw ImageIoError(std::string("PPM header: invalid ") + what);
  return std::stoi(tok);
}

}  // namespace

Image decode_ppm(const std::string& bytes) {
  std::size_t pos = 0;
  if (next_token(bytes, pos) != "P6") throw ImageIoError("not a binary PPM (P6) file");
  const int w = header_int(bytes, pos, "width");
  const int h = header_int(bytes, pos, "height");
  const int maxval = header_int(bytes, pos, "maxval");
  if (w < 1 || h < 1) throw ImageIoError("PPM header: empty image");
  if (maxval != 255) throw ImageIoError("only 8-bit PPM (maxval 255) is supported");
  ++pos;  // single whitespace byte before the raster
  const std::size_t need = std::size_t(w) * h * 3;
  if (bytes.size() < pos + need) throw ImageIoError("PPM raster is truncated");
  Image img(w, h, 3);
  for (std::size_t i = 0; i < need; ++i)
    img.data[i] = static_cast<unsigned char>(bytes[pos + i]) / 255.0;
  return img;
}

Image read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ImageIoError(path.string() + ": cannot open");
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_ppm(bytes);
  } catch (const ImageIoError& e) {
    throw ImageIoError(path.string() + ": " + e.what());
  }
}

Image depth_to_display(const Image& depth, const Image& alpha) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < depth.data.size(); ++i)
    if (alpha.data[i] > 0.0) {
      lo = std::min(lo, depth.data[i]);
      hi = std::max(hi, depth.data[i]);
    }
  Image out(depth.width, depth.height, 1, 1.0);
  const double range = hi > lo ? hi - lo : 1.0;
  for (std::size_t i = 0; i < depth.data.size(); ++i)
    if (alpha.data[i] > 0.0) out.data[i] = (depth.data[i] - lo) / range;
  return out;
}

Image normal_to_display(const Image& normal) {
  Image out = normal;
  for (double& v : out.data) v = 0.5 * (v + 1.0);
  return out;
}

}  // namespace splat2d
