#include "splat2d/geometry.hpp"

#include "splat2d/filters.hpp"

#include <algorithm>
#include <cmath>

namespace splat2d {

namespace {

constexpr double kDegenerateRel = 1e-9;

// Pixel x/y planes pulled back into splat-local homogeneous coordinates.
struct LocalPlanes {
  Vec4 hu;
  Vec4 hv;
  double denom;
  bool degenerate;
};

LocalPlanes local_planes(const Mat4& m, const Vec2& pixel) {
  LocalPlanes p;
  p.hu = -m.row(0).transpose() + pixel.x() * m.row(3).transpose();
  p.hv = -m.row(1).transpose() + pixel.y() * m.row(3).transpose();
  p.denom = p.hu[0] * p.hv[1] - p.hu[1] * p.hv[0];
  const double norm = m.cwiseAbs().rowwise().sum().maxCoeff();
  p.degenerate = !(std::abs(p.denom) >= kDegenerateRel * norm * norm);
  return p;
}

int floor_pixel(double v) { return int(std::floor(v - 0.5)); }
int ceil_pixel(double v) { return int(std::ceil(v - 0.5)); }

}  // namespace

Mat4 world_to_screen(const Camera& camera) {
  Mat4 proj = Mat4::Zero();
  proj(0, 0) = camera.fx;
  proj(0, 2) = camera.cx;
  proj(1, 1) = camera.fy;
  proj(1, 2) = camera.cy;
  proj(2, 2) = 1.0;
  proj(3, 2) = 1.0;
  return proj * camera.world_to_camera;
}

SplatScreenTransform make_screen_transform(const Mat4& world_to_screen, const Mat4& object_to_world,
                                           double near_plane) {
  SplatScreenTransform t;
  t.M = world_to_screen * object_to_world;
  t.valid = t.M(3, 3) > near_plane;
  return t;
}

SplatScreenTransform make_screen_transform(const Splat& splat, const Camera& camera,
                                           double near_plane) {
  return make_screen_transform(world_to_screen(camera), object_to_world(splat), near_plane);
}

Intersection ray_splat_intersect(const SplatScreenTransform& transform, const Vec2& pixel) {
  const LocalPlanes p = local_planes(transform.M, pixel);
  Intersection hit;
  hit.denom = p.denom;
  hit.degenerate = p.degenerate;
  if (p.degenerate) return hit;
  const Vec4& hu = p.hu;
  const Vec4& hv = p.hv;
  hit.uv.x() = (hu[1] * hv[3] - hu[3] * hv[1]) / p.denom;
  hit.uv.y() = (hu[3] * hv[0] - hu[0] * hv[3]) / p.denom;
  const Mat4& m = transform.M;
  hit.depth = m(2, 0) * hit.uv.x() + m(2, 1) * hit.uv.y() + m(2, 3);
  return hit;
}

std::optional<Mat2> intersect_jacobian(const SplatScreenTransform& transform, const Vec2& pixel) {
  const LocalPlanes p = local_planes(transform.M, pixel);
  if (p.degenerate) return std::nullopt;
  const Vec4& hu = p.hu;
  const Vec4& hv = p.hv;
  const double d = p.denom;
  const double u = (hu[1] * hv[3] - hu[3] * hv[1]) / d;
  const double v = (hu[3] * hv[0] - hu[0] * hv[3]) / d;
  // Only hu depends on x and only hv on y, both through the last row of M.
  const Vec4 w = transform.M.row(3).transpose();

  const double dd_dx = w[0] * hv[1] - w[1] * hv[0];
  const double dnu_dx = w[1] * hv[3] - w[3] * hv[1];
  const double dnv_dx = w[3] * hv[0] - w[0] * hv[3];
  const double dd_dy = hu[0] * w[1] - hu[1] * w[0];
  const double dnu_dy = hu[1] * w[3] - hu[3] * w[1];
  const double dnv_dy = hu[3] * w[0] - hu[0] * w[3];

  Mat2 j;
  j(0, 0) = (dnu_dx - u * dd_dx) / d;
  j(0, 1) = (dnu_dy - u * dd_dy) / d;
  j(1, 0) = (dnv_dx - v * dd_dx) / d;
  j(1, 1) = (dnv_dy - v * dd_dy) / d;
  return j;
}

double cutoff_radius(double opacity, const RenderConfig& config) {
  if (!(opacity > config.alpha_cutoff)) return 0.0;
  return std::max(config.bbox_nsigma, std::sqrt(2.0 * std::log(opacity / config.alpha_cutoff)));
}

PixelBox footprint_bbox(const SplatScreenTransform& transform, double opacity, const Camera& camera,
                        const RenderConfig& config) {
  if (!transform.valid || !(opacity > config.alpha_cutoff)) return {};
  const double r = cutoff_radius(opacity, config);
  const Mat4& m = transform.M;

  double xmin, xmax, ymin, ymax;
  // The disk |uv| <= r projects to an ellipse only if it lies entirely in
  // front of the camera; otherwise its image is unbounded.
  const double min_depth = m(3, 3) - r * std::hypot(m(3, 0), m(3, 1));
  if (min_depth > 1e-9 * std::abs(m(3, 3))) {
    // Tangent lines of the dual conic T diag(r^2, r^2, -1) T^T, where T maps
    // local homogeneous (u, v, 1) to screen homogeneous (x, y, w).
    Eigen::Matrix3d t;
    for (int row = 0; row < 3; ++row) {
      const int src = row == 2 ? 3 : row;
      t(row, 0) = m(src, 0);
      t(row, 1) = m(src, 1);
      t(row, 2) = m(src, 3);
    }
    const Eigen::Matrix3d dual =
        t * Eigen::Vector3d(r * r, r * r, -1.0).asDiagonal() * t.transpose();
    const double c22 = dual(2, 2);
    const double cx = dual(0, 2) / c22;
    const double cy = dual(1, 2) / c22;
    const double hx = std::sqrt(std::max(0.0, cx * cx - dual(0, 0) / c22));
    const double hy = std::sqrt(std::max(0.0, cy * cy - dual(1, 1) / c22));
    xmin = cx - hx;
    xmax = cx + hx;
    ymin = cy - hy;
    ymax = cy + hy;
  } else {
    xmin = ymin = -1e30;
    xmax = ymax = 1e30;
  }

  if (config.filter_mode == FilterMode::AA && config.mip_sigma > 0.0) {
    // Exact under the affine model; the extra margin absorbs the perspective
    // variation of J within about one pixel.
    const double pad = 1.25 * r * std::sqrt(config.mip_sigma) + 1.0;
    xmin -= pad;
    xmax += pad;
    ymin -= pad;
    ymax += pad;
  }
  if (config.filter_mode == FilterMode::Clamp) {
    const Vec2 c = transform.projected_center();
    const double rc = config.clamp_sigma * std::sqrt(2.0 * std::log(opacity / config.alpha_cutoff));
    xmin = std::min(xmin, c.x() - rc);
    xmax = std::max(xmax, c.x() + rc);
    ymin = std::min(ymin, c.y() - rc);
    ymax = std::max(ymax, c.y() + rc);
  }

  const double big = 1e9;
  PixelBox box;
  box.x0 = std::max(0, floor_pixel(std::max(xmin, -big)));
  box.x1 = std::min(camera.width - 1, ceil_pixel(std::min(xmax, big)));
  box.y0 = std::max(0, floor_pixel(std::max(ymin, -big)));
  box.y1 = std::min(camera.height - 1, ceil_pixel(std::min(ymax, big)));
  if (box.empty()) return {};
  return box;
}

PixelBox screen_bbox(const Splat& splat, const Camera& camera, const RenderConfig& config) {
  Vec2 scales = splat.scales();
  double opacity = splat.opacity();
  if (config.filter_mode == FilterMode::AA) {
    const SmoothedSplat smoothed = flat_smooth(splat, config.smooth_sreg);
    scales = smoothed.eff_scales;
    opacity = smoothed.eff_opacity;
  }
  const SplatScreenTransform t = make_screen_transform(
      world_to_screen(camera), object_to_world(splat, scales), config.near_plane);
  return footprint_bbox(t, opacity, camera, config);
}

}  // namespace splat2d
