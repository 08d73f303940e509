#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace splat2d {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Quat = Eigen::Quaterniond;

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double logit(double p) { return std::log(p / (1.0 - p)); }

/// One planar Gaussian primitive.
///
/// The parameters are stored in unconstrained form (quaternion, log scales,
/// logit opacity) so the optimizer can update them freely; the accessors
/// return the physical quantities.
struct Splat {
  Vec3 center = Vec3::Zero();
  Quat rotation = Quat::Identity();
  Vec2 log_scales = Vec2::Zero();
  double logit_opacity = 0.0;
  Vec3 color = Vec3::Constant(0.5);
  /// Maximal sampling rate over the training views, cycles per world unit.
  /// Zero means not computed yet, or not seen by any camera.
  double freq_bound = 0.0;

  static Splat from_physical(const Vec3& center, const Quat& rotation, const Vec2& scales,
                             double opacity, const Vec3& color, double freq_bound = 0.0);

  Vec2 scales() const { return log_scales.array().exp(); }
  double opacity() const { return sigmoid(logit_opacity); }
  /// Rotation matrix [t_u, t_v, t_u x t_v] of the normalized quaternion.
  Mat3 frame() const { return rotation.normalized().toRotationMatrix(); }
  Vec3 tangent_u() const { return frame().col(0); }
  Vec3 tangent_v() const { return frame().col(1); }
  Vec3 normal() const { return frame().col(2); }
};

/// Pinhole camera. Pixel (i, j) has its center at (i + 0.5, j + 0.5).
struct Camera {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.5;
  double cy = 0.5;
  int width = 1;
  int height = 1;
  Mat4 world_to_camera = Mat4::Identity();

  /// Throws InvalidArgument if the intrinsics or the pose are malformed.
  void validate() const;

  Mat3 rotation() const { return world_to_camera.topLeftCorner<3, 3>(); }
  Vec3 translation() const { return world_to_camera.topRightCorner<3, 1>(); }
  Vec3 position() const { return -rotation().transpose() * translation(); }
  Vec3 to_camera(const Vec3& p) const { return rotation() * p + translation(); }

  /// Same pose with intrinsics and resolution multiplied by `factor`.
  Camera scaled(double factor) const;

  static Camera look_at(const Vec3& eye, const Vec3& target, const Vec3& up, double focal,
                        int width, int height);
};

struct Scene {
  std::vector<Splat> splats;
  std::vector<Camera> cameras;
  Vec3 background = Vec3::Zero();
};

enum class FilterMode { None, Clamp, AA };

const char* to_string(FilterMode mode);
FilterMode parse_filter_mode(const std::string& name);

struct RenderConfig {
  FilterMode filter_mode = FilterMode::AA;
  /// Variance of the screen-space Mip filter, in squared pixels.
  double mip_sigma = 0.1;
  double smooth_sreg = 0.2;
  /// Screen-space standard deviation of the legacy clamping branch, pixels.
  double clamp_sigma = 0.7071;
  int tile_size = 16;
  double alpha_cutoff = 1.0 / 255.0;
  double transmittance_floor = 1e-4;
  double near_plane = 0.2;
  double bbox_nsigma = 3.0;
  /// Worker threads for tile rendering; 0 picks the hardware concurrency.
  int threads = 1;

  void validate() const;
};

/// Planar image buffer, row-major with interleaved channels.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<double> data;

  Image() = default;
  Image(int w, int h, int c, double fill = 0.0)
      : width(w), height(h), channels(c), data(std::size_t(w) * h * c, fill) {}

  double& at(int x, int y, int c = 0) { return data[(std::size_t(y) * width + x) * channels + c]; }
  double at(int x, int y, int c = 0) const {
    return data[(std::size_t(y) * width + x) * channels + c];
  }
  bool same_shape(const Image& o) const {
    return width == o.width && height == o.height && channels == o.channels;
  }
  std::size_t pixel_count() const { return std::size_t(width) * height; }
};

struct RenderOutput {
  Image color;   // 3 channels
  Image alpha;   // 1 channel
  Image depth;   // 1 channel, weight-normalized camera-space depth, 0 where empty
  Image normal;  // 3 channels, alpha-blended world-space normals
  std::size_t degenerate_skips = 0;
};

/// Object-to-world matrix H = [s_u t_u, s_v t_v, 0, p; 0 0 0 1].
Mat4 object_to_world(const Splat& splat);
/// Same construction with explicit scales (used for smoothed footprints).
Mat4 object_to_world(const Splat& splat, const Vec2& scales);

/// Unit local Gaussian exp(-(u^2 + v^2) / 2).
inline double gaussian_local(const Vec2& uv) { return std::exp(-0.5 * uv.squaredNorm()); }

}  // namespace splat2d
