#include "splat2d/evaluation.hpp"

#include "splat2d/filters.hpp"
#include "splat2d/rasterizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace splat2d {

std::string ScaleSpec::label() const {
  if (magnify) return std::to_string(factor) + "x";
  if (factor == 1) return "1";
  return "1/" + std::to_string(factor);
}

ScaleSpec ScaleSpec::parse(const std::string& text) {
  ScaleSpec s;
  auto check = [&](const std::string& digits) {
    if (digits != "1" && digits != "2" && digits != "4" && digits != "8")
      throw InvalidArgument("invalid scale '" + text + "' (expected 1/8, 1/4, 1/2, 1, 2x, 4x or 8x)");
    return std::stoi(digits);
  };
  if (text.size() > 2 && text.rfind("1/", 0) == 0) {
    s.factor = check(text.substr(2));
  } else if (!text.empty() && text.back() == 'x') {
    s.factor = check(text.substr(0, text.size() - 1));
    s.magnify = s.factor != 1;
  } else {
    s.factor = check(text);
    if (s.factor != 1) throw InvalidArgument("invalid scale '" + text + "'");
  }
  return s;
}

std::vector<ScaleSpec> default_scales() {
  return {{8, false}, {4, false}, {2, false}, {1, false}, {2, true}, {4, true}, {8, true}};
}

std::vector<ScaleResult> multiscale_eval(const Scene& scene, int view,
                                         std::span<const FilterMode> modes,
                                         std::span<const ScaleSpec> scales,
                                         const RenderConfig& base_config) {
  if (view < 0 || view >= int(scene.cameras.size()))
    throw InvalidArgument("view index " + std::to_string(view) + " out of range");
  // Frequency bounds belong to the training views and stay fixed at test time.
  Scene fixed = scene;
  for (Splat& s : fixed.splats)
    if (s.freq_bound == 0.0)
      s.freq_bound = max_sampling_rate(s.center, fixed.cameras, base_config.near_plane);

  const Camera& base = scene.cameras[std::size_t(view)];
  std::vector<ScaleResult> rows;
  for (const ScaleSpec& scale : scales) {
    Image target;
    Camera cam;
    if (scale.magnify) {
      cam = base.scaled(scale.factor);
      RenderConfig plain = base_config;
      plain.filter_mode = FilterMode::None;
      target = render(fixed, cam, plain).color;
    } else {
      if (base.width % scale.factor != 0 || base.height % scale.factor != 0)
        throw InvalidArgument("view resolution is not divisible by " + std::to_string(scale.factor));
      cam = base.scaled(1.0 / scale.factor);
      target = supersample_reference(fixed, cam, scale.factor, base_config);
    }
    for (const FilterMode mode : modes) {
      RenderConfig config = base_config;
      config.filter_mode = mode;
      const Image img = render(fixed, cam, config).color;
      ScaleResult r;
      r.scale = scale;
      r.mode = mode;
      r.metrics.mse = mse(img, target);
      r.metrics.psnr = psnr(img, target);
      if (img.width >= kSsimWindow && img.height >= kSsimWindow) {
        r.metrics.ssim = ssim(img, target);
      } else {
        r.metrics.ssim = std::numeric_limits<double>::quiet_NaN();
        r.ssim_valid = false;
      }
      rows.push_back(r);
    }
  }
  return rows;
}

void write_multiscale_csv(std::ostream& out, std::span<const ScaleResult> rows) {
  std::vector<FilterMode> modes;
  std::vector<std::string> scales;
  for (const ScaleResult& r : rows) {
    if (std::find(modes.begin(), modes.end(), r.mode) == modes.end()) modes.push_back(r.mode);
    if (std::find(scales.begin(), scales.end(), r.scale.label()) == scales.end())
      scales.push_back(r.scale.label());
  }
  out << "scale";
  for (const FilterMode m : modes) {
    const std::string name = to_string(m);
    out << ',' << name << "_psnr," << name << "_ssim," << name << "_mse";
  }
  out << '\n';
  char buf[96];
  for (const std::string& label : scales) {
    out << label;
    for (const FilterMode m : modes) {
      const auto it = std::find_if(rows.begin(), rows.end(), [&](const ScaleResult& r) {
        return r.mode == m && r.scale.label() == label;
      });
      if (it == rows.end()) {
        out << ",,,";
        continue;
      }
      if (it->ssim_valid)
        std::snprintf(buf, sizeof buf, ",%.6f,%.6f,%.9g", it->metrics.psnr, it->metrics.ssim, it->metrics.mse);
      else
        std::snprintf(buf, sizeof buf, ",%.6f,nan,%.9g", it->metrics.psnr, it->metrics.mse);
      out << buf;
    }
    out << '\n';
  }
}

double max_gradient_magnitude(const Image& image) {
  double best = 0.0;
  auto gray = [&](int x, int y) {
    double s = 0.0;
    for (int c = 0; c < image.channels; ++c) s += image.at(x, y, c);
    return s / image.channels;
  };
  for (int y = 0; y + 1 < image.height; ++y)
    for (int x = 0; x + 1 < image.width; ++x) {
      const double g = gray(x, y);
      best = std::max(best, std::hypot(gray(x + 1, y) - g, gray(x, y + 1) - g));
    }
  return best;
}

}  // namespace splat2d
