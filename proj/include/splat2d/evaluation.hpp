#pragma once

#include "splat2d/core.hpp"
#include "splat2d/metrics.hpp"

#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace splat2d {

/// A rendering scale relative to the training resolution: 1/k (zoom out) or
/// k x (zoom in), k in {1, 2, 4, 8}.
struct ScaleSpec {
  int factor = 1;
  bool magnify = false;

  double value() const { return magnify ? double(factor) : 1.0 / factor; }
  /// "1/8", "1/2", "1", "2x", ...
  std::string label() const;
  static ScaleSpec parse(const std::string& text);
};

/// 1/8, 1/4, 1/2, 1, 2x, 4x, 8x.
std::vector<ScaleSpec> default_scales();

struct ScaleResult {
  ScaleSpec scale;
  FilterMode mode = FilterMode::None;
  MetricReport metrics;
  bool ssim_valid = true;  // false when the image is smaller than the SSIM window
};

/// Renders `scene` from camera `view` at every scale and mode and compares to
/// the reference: the box-downsampled full-resolution render for zoom-out
/// scales, the unfiltered render at the magnified resolution for zoom-in
/// scales. Frequency bounds come from the scene's own (training) cameras.
std::vector<ScaleResult> multiscale_eval(const Scene& scene, int view,
                                         std::span<const FilterMode> modes,
                                         std::span<const ScaleSpec> scales,
                                         const RenderConfig& base_config);

/// Wide CSV: one row per scale, columns "<mode>_psnr,<mode>_ssim,<mode>_mse"
/// per mode in first-appearance order.
void write_multiscale_csv(std::ostream& out, std::span<const ScaleResult> rows);

/// Largest per-pixel gradient magnitude of the channel-mean image, using
/// forward differences.
double max_gradient_magnitude(const Image& image);

}  // namespace splat2d
