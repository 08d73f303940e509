#include "splat2d/core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace splat2d {

Splat Splat::from_physical(const Vec3& center, const Quat& rotation, const Vec2& scales,
                           double opacity, const Vec3& color, double freq_bound) {
  if (!(scales.array() > 0.0).all()) throw InvalidArgument("splat scales must be positive");
  if (!(opacity > 0.0 && opacity < 1.0)) throw InvalidArgument("splat opacity must lie in (0,1)");
  Splat s;
  s.center = center;
  s.rotation = rotation.normalized();
  s.log_scales = scales.array().log();
  s.logit_opacity = logit(opacity);
  s.color = color;
  s.freq_bound = freq_bound;
  return s;
}

void Camera::validate() const {
  if (!(fx > 0.0 && fy > 0.0)) throw InvalidArgument("camera focal lengths must be positive");
  if (width < 1 || height < 1) throw InvalidArgument("camera dimensions must be at least 1");
  if (!world_to_camera.allFinite()) throw InvalidArgument("camera pose must be finite");
  const Mat3 r = rotation();
  if (!(r.transpose() * r).isIdentity(1e-9) || r.determinant() < 0.0)
    throw InvalidArgument("camera pose rotation block is not a rotation");
  if (!world_to_camera.row(3).isApprox(Vec4(0, 0, 0, 1).transpose()))
    throw InvalidArgument("camera pose last row must be (0,0,0,1)");
}

Camera Camera::scaled(double factor) const {
  Camera c = *this;
  c.fx *= factor;
  c.fy *= factor;
  c.cx *= factor;
  c.cy *= factor;
  c.width = std::max(1, int(std::lround(width * factor)));
  c.height = std::max(1, int(std::lround(height * factor)));
  return c;
}

Camera Camera::look_at(const Vec3& eye, const Vec3& target, const Vec3& up, double focal,
                       int width, int height) {
  // OpenCV convention: x right, y down, z forward.
  const Vec3 z = (target - eye).normalized();
  const Vec3 x = z.cross(up).normalized();
  const Vec3 y = z.cross(x);
  Mat3 r;
  r.row(0) = x;
  r.row(1) = y;
  r.row(2) = z;
  Camera c;
  c.fx = c.fy = focal;
  c.cx = 0.5 * width;
  c.cy = 0.5 * height;
  c.width = width;
  c.height = height;
  c.world_to_camera.setIdentity();
  c.world_to_camera.topLeftCorner<3, 3>() = r;
  c.world_to_camera.topRightCorner<3, 1>() = -r * eye;
  return c;
}

const char* to_string(FilterMode mode) {
  switch (mode) {
    case FilterMode::None: return "none";
    case FilterMode::Clamp: return "clamp";
    case FilterMode::AA: return "aa";
  }
  return "?";
}

FilterMode parse_filter_mode(const std::string& name) {
  if (name == "none") return FilterMode::None;
  if (name == "clamp") return FilterMode::Clamp;
  if (name == "aa") return FilterMode::AA;
  throw InvalidArgument("unknown filter mode '" + name + "' (expected none, clamp or aa)");
}

void RenderConfig::validate() const {
  // mip_sigma and smooth_sreg may be zero: that disables the respective filter.
  if (!(mip_sigma >= 0.0) || !(smooth_sreg >= 0.0))
    throw InvalidArgument("mip_sigma and smooth_sreg must be non-negative");
  if (!(clamp_sigma > 0.0)) throw InvalidArgument("clamp_sigma must be positive");
  if (tile_size != 8 && tile_size != 16 && tile_size != 32)
    throw InvalidArgument("tile_size must be 8, 16 or 32");
  if (!(alpha_cutoff > 0.0) || !(transmittance_floor > 0.0) || !(near_plane > 0.0) ||
      !(bbox_nsigma > 0.0))
    throw InvalidArgument("render cutoffs must be positive");
  if (threads < 0) throw InvalidArgument("threads must be non-negative");
}

Mat4 object_to_world(const Splat& splat, const Vec2& scales) {
  const Mat3 r = splat.frame();
  Mat4 h = Mat4::Zero();
  h.block<3, 1>(0, 0) = scales.x() * r.col(0);
  h.block<3, 1>(0, 1) = scales.y() * r.col(1);
  h.block<3, 1>(0, 3) = splat.center;
  h(3, 3) = 1.0;
  return h;
}

Mat4 object_to_world(const Splat& splat) { return object_to_world(splat, splat.scales()); }

}  // namespace splat2d
