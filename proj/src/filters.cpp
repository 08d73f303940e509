#include "splat2d/filters.hpp"

#include <algorithm>
#include <cmath>

namespace splat2d {

double max_sampling_rate(const Vec3& center, std::span<const Camera> cameras, double near_plane) {
  double best = 0.0;
  for (const Camera& cam : cameras) {
    const Vec3 pc = cam.to_camera(center);
    const double depth = pc.z();
    if (!(depth > near_plane)) continue;
    const double x = cam.fx * pc.x() / depth + cam.cx;
    const double y = cam.fy * pc.y() / depth + cam.cy;
    const double mx = kFrustumMargin * cam.width;
    const double my = kFrustumMargin * cam.height;
    if (x < -mx || x > cam.width + mx || y < -my || y > cam.height + my) continue;
    best = std::max(best, cam.fx / depth);
  }
  return best;
}

void compute_freq_bounds(std::span<Splat> splats, std::span<const Camera> cameras,
                         double near_plane) {
  if (cameras.empty()) throw InvalidArgument("frequency bounds need at least one camera");
  for (Splat& s : splats) s.freq_bound = max_sampling_rate(s.center, cameras, near_plane);
}

SmoothedSplat flat_smooth(const Splat& splat, double s_reg) {
  SmoothedSplat out;
  out.base = &splat;
  const Vec2 s = splat.scales();
  const double alpha = splat.opacity();
  if (!(splat.freq_bound > 0.0) || s_reg == 0.0) {
    out.eff_scales = s;
    out.eff_opacity = alpha;
    return out;
  }
  const double var = s_reg / (splat.freq_bound * splat.freq_bound);
  out.sigma_smooth_sq = var;
  out.eff_scales = Vec2(std::sqrt(s.x() * s.x() + var), std::sqrt(s.y() * s.y() + var));
  out.eff_opacity = alpha * (s.x() / out.eff_scales.x()) * (s.y() / out.eff_scales.y());
  return out;
}

double mip_filtered_gaussian(const Vec2& uv, const Mat2& jacobian, double mip_sigma) {
  const Mat2 cov = mip_local_covariance(jacobian, mip_sigma);
  const double det = cov.determinant();
  // Symmetric 2x2 inverse written out; cov is SPD.
  const double q = (cov(1, 1) * uv.x() * uv.x() - 2.0 * cov(0, 1) * uv.x() * uv.y() +
                    cov(0, 0) * uv.y() * uv.y()) /
                   det;
  return std::exp(-0.5 * q) / std::sqrt(det);
}

double clamped_gaussian(const Vec2& uv, const Vec2& pixel, const Vec2& projected_center,
                        double clamp_sigma) {
  return std::max(gaussian_local(uv), screen_gaussian(pixel, projected_center, clamp_sigma));
}

}  // namespace splat2d
