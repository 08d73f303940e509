#pragma once

#include "splat2d/core.hpp"

#include <optional>

namespace splat2d {

/// 4x4 world-to-screen matrix. For camera-space point (x, y, z) it yields
/// (fx x + cx z, fy y + cy z, z, z): the first two components divided by the
/// fourth are pixel coordinates, the third keeps the camera depth.
Mat4 world_to_screen(const Camera& camera);

/// M = W H for one splat. `valid` is false when the splat center is not in
/// front of the near plane.
struct SplatScreenTransform {
  Mat4 M = Mat4::Identity();
  bool valid = false;

  /// Camera-space depth of the splat center.
  double center_depth() const { return M(3, 3); }
  /// Pixel coordinates of the projected splat center.
  Vec2 projected_center() const { return Vec2(M(0, 3) / M(3, 3), M(1, 3) / M(3, 3)); }
};

SplatScreenTransform make_screen_transform(const Mat4& world_to_screen, const Mat4& object_to_world,
                                           double near_plane);
SplatScreenTransform make_screen_transform(const Splat& splat, const Camera& camera,
                                           double near_plane);

struct Intersection {
  Vec2 uv = Vec2::Zero();
  double depth = 0.0;
  double denom = 0.0;
  /// The ray is (numerically) parallel to the splat plane; uv and depth are
  /// meaningless and the contribution must be skipped.
  bool degenerate = true;
};

/// Intersects the ray through `pixel` with the splat plane and returns the
/// hit in splat-local coordinates.
Intersection ray_splat_intersect(const SplatScreenTransform& transform, const Vec2& pixel);

/// Analytic Jacobian d(u, v) / d(x, y) of the pixel-to-local mapping at
/// `pixel`. Empty when the intersection is degenerate.
std::optional<Mat2> intersect_jacobian(const SplatScreenTransform& transform, const Vec2& pixel);

/// Inclusive integer pixel range. Empty when x0 > x1 or y0 > y1.
struct PixelBox {
  int x0 = 0;
  int y0 = 0;
  int x1 = -1;
  int y1 = -1;

  bool empty() const { return x0 > x1 || y0 > y1; }
  bool contains(int x, int y) const { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }
  static PixelBox full(const Camera& camera) { return {0, 0, camera.width - 1, camera.height - 1}; }
};

/// Local-space radius outside of which a splat of peak opacity `opacity`
/// cannot reach `config.alpha_cutoff`; never smaller than bbox_nsigma.
double cutoff_radius(double opacity, const RenderConfig& config);

/// Conservative pixel box for an already transformed footprint with the given
/// peak opacity. Takes the filter mode of `config` into account (Mip filter
/// padding, clamping branch).
PixelBox footprint_bbox(const SplatScreenTransform& transform, double opacity, const Camera& camera,
                        const RenderConfig& config);

/// Conservative pixel box of all pixels where the splat, rendered with
/// `config`, can contribute at least alpha_cutoff.
PixelBox screen_bbox(const Splat& splat, const Camera& camera, const RenderConfig& config);

}  // namespace splat2d
