#pragma once

#include "splat2d/core.hpp"

#include <span>

namespace splat2d {

/// Fraction of the viewport added on every side for the frustum test of the
/// frequency bound.
inline constexpr double kFrustumMargin = 0.15;

/// Maximal sampling rate fx / depth over the cameras whose (slightly
/// enlarged) frustum contains `center`; 0 when no camera sees it.
double max_sampling_rate(const Vec3& center, std::span<const Camera> cameras,
                         double near_plane = 0.2);

/// Refreshes the cached frequency bound of every splat.
void compute_freq_bounds(std::span<Splat> splats, std::span<const Camera> cameras,
                         double near_plane = 0.2);

/// A splat convolved on its own plane with an isotropic low-pass of variance
/// s_reg / freq_bound^2, with the opacity rescaled to keep the integral.
struct SmoothedSplat {
  const Splat* base = nullptr;
  Vec2 eff_scales = Vec2::Ones();
  double eff_opacity = 0.0;
  double sigma_smooth_sq = 0.0;
};

/// Pass-through (eff == base) when the splat carries no frequency bound.
SmoothedSplat flat_smooth(const Splat& splat, double s_reg);

/// Local covariance I + sigma J J^T of the object-space Mip filter.
inline Mat2 mip_local_covariance(const Mat2& jacobian, double mip_sigma) {
  return Mat2::Identity() + mip_sigma * jacobian * jacobian.transpose();
}

/// Gaussian in splat-local coordinates after convolution with a screen-space
/// Gaussian of variance `mip_sigma` (pixels^2), mapped through `jacobian`:
/// det(S)^(-1/2) exp(-uv^T S^-1 uv / 2) with S = I + sigma J J^T.
double mip_filtered_gaussian(const Vec2& uv, const Mat2& jacobian, double mip_sigma);

/// Legacy clamping: max of the local Gaussian and an isotropic screen-space
/// Gaussian of std-dev `clamp_sigma` around the projected center.
double clamped_gaussian(const Vec2& uv, const Vec2& pixel, const Vec2& projected_center,
                        double clamp_sigma);

inline double screen_gaussian(const Vec2& pixel, const Vec2& projected_center, double clamp_sigma) {
  return std::exp(-0.5 * (pixel - projected_center).squaredNorm() / (clamp_sigma * clamp_sigma));
}

}  // namespace splat2d
