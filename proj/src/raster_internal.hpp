#pragma once

// Shared by the forward renderers and the backward pass so that both walk
// exactly the same per-pixel contribution sequence.

#include "splat2d/core.hpp"
#include "splat2d/geometry.hpp"
#include "splat2d/rasterizer.hpp"

#include <vector>

namespace splat2d::detail {

struct PreparedSplat {
  int index = 0;
  SplatScreenTransform transform;
  Vec2 scales = Vec2::Ones();
  Vec2 eff_scales = Vec2::Ones();
  double sigma_smooth_sq = 0.0;
  double opacity = 0.0;
  double eff_opacity = 0.0;
  Vec3 color = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();  // world space, oriented toward the camera
  Vec2 center_px = Vec2::Zero();
  PixelBox box;
};

std::vector<PreparedSplat> prepare_splats(const Scene& scene, const Camera& camera,
                                          const RenderConfig& config);

/// Per (splat, pixel) Jacobians recorded on one forward pass and replayed on
/// later ones, so that the Mip filter covariance stays fixed while the splat
/// parameters are perturbed.
class JacobianTape {
 public:
  enum class Mode { Record, Replay };

  JacobianTape(std::size_t splats, int width, int height)
      : width_(width), height_(height), pixels_(std::size_t(width) * height),
        jacobians_(splats * pixels_), present_(splats * pixels_, 0) {}

  Mode mode = Mode::Record;

  bool matches(std::size_t splats, int width, int height) const {
    return width == width_ && height == height_ && splats * pixels_ == jacobians_.size();
  }
  const Mat2* find(int splat, std::size_t pixel) const {
    const std::size_t i = std::size_t(splat) * pixels_ + pixel;
    return present_[i] ? &jacobians_[i] : nullptr;
  }
  void store(int splat, std::size_t pixel, const Mat2& j) {
    const std::size_t i = std::size_t(splat) * pixels_ + pixel;
    jacobians_[i] = j;
    present_[i] = 1;
  }

 private:
  int width_;
  int height_;
  std::size_t pixels_;
  std::vector<Mat2> jacobians_;
  std::vector<char> present_;
};

enum class ShadeStatus { Hit, Miss, Degenerate };

struct Sample {
  double kernel = 0.0;  // filtered Gaussian value G
  double alpha = 0.0;   // eff_opacity * G
  Vec2 uv = Vec2::Zero();
  double depth = 0.0;
  Mat2 cov_inv = Mat2::Identity();  // inverse local covariance, AA mode
  bool screen_branch = false;       // Clamp mode: screen-space Gaussian won
};

ShadeStatus shade(const PreparedSplat& splat, const Vec2& pixel, std::size_t pixel_index,
                  const RenderConfig& config, JacobianTape* tape, Sample& out);

inline Vec2 pixel_center(int x, int y) { return Vec2(x + 0.5, y + 0.5); }

/// Front-to-back order over the splats that can be shaded at all.
std::vector<int> global_order(const std::vector<PreparedSplat>& splats);

TileBinning bin_prepared(const std::vector<PreparedSplat>& splats, const Camera& camera,
                         int tile_size);

/// Forward render over explicit per-pixel candidate lists; `tape` may be null.
RenderOutput render_with(const Scene& scene, const Camera& camera, const RenderConfig& config,
                         bool tiled, JacobianTape* tape);

}  // namespace splat2d::detail
