#include "parallel.hpp"
#include "raster_internal.hpp"
#include "splat2d/filters.hpp"
#include "splat2d/fit.hpp"

#include <cmath>

namespace splat2d {

namespace {

using detail::PreparedSplat;
using detail::Sample;
using detail::ShadeStatus;

// Gradient accumulated per splat before the chain rule to parameters.
struct ScreenGrad {
  Mat4 d_m = Mat4::Zero();
  double d_eff_opacity = 0.0;
  Vec3 d_color = Vec3::Zero();

  ScreenGrad& operator+=(const ScreenGrad& o) {
    d_m += o.d_m;
    d_eff_opacity += o.d_eff_opacity;
    d_color += o.d_color;
    return *this;
  }
};

// Adds dL/dM for a gradient on the intersection coordinates at `pixel`.
void backprop_uv(const Mat4& m, const Vec2& pixel, const Vec2& d_uv, Mat4& d_m) {
  const Vec4 hu = -m.row(0).transpose() + pixel.x() * m.row(3).transpose();
  const Vec4 hv = -m.row(1).transpose() + pixel.y() * m.row(3).transpose();
  const double d = hu[0] * hv[1] - hu[1] * hv[0];
  const double u = (hu[1] * hv[3] - hu[3] * hv[1]) / d;
  const double v = (hu[3] * hv[0] - hu[0] * hv[3]) / d;
  const double gu = d_uv.x();
  const double gv = d_uv.y();

  Vec4 g_hu = Vec4::Zero();
  Vec4 g_hv = Vec4::Zero();
  // u = Nu / D, v = Nv / D with
  //   D  = hu0 hv1 - hu1 hv0
  //   Nu = hu1 hv3 - hu3 hv1
  //   Nv = hu3 hv0 - hu0 hv3
  g_hu[0] = (gu * (-u * hv[1]) + gv * (-hv[3] - v * hv[1])) / d;
  g_hu[1] = (gu * (hv[3] + u * hv[0]) + gv * (v * hv[0])) / d;
  g_hu[3] = (gu * (-hv[1]) + gv * hv[0]) / d;
  g_hv[0] = (gu * (u * hu[1]) + gv * (hu[3] + v * hu[1])) / d;
  g_hv[1] = (gu * (-hu[3] - u * hu[0]) + gv * (-v * hu[0])) / d;
  g_hv[3] = (gu * hu[1] + gv * (-hu[0])) / d;

  d_m.row(0) -= g_hu.transpose();
  d_m.row(1) -= g_hv.transpose();
  d_m.row(3) += (pixel.x() * g_hu + pixel.y() * g_hv).transpose();
}

// Adds dL/dM for a gradient on the projected center M[0..1,3] / M[3,3].
void backprop_center(const Mat4& m, const Vec2& d_c, Mat4& d_m) {
  const double w = m(3, 3);
  d_m(0, 3) += d_c.x() / w;
  d_m(1, 3) += d_c.y() / w;
  d_m(3, 3) -= (d_c.x() * m(0, 3) + d_c.y() * m(1, 3)) / (w * w);
}

struct Contribution {
  int pos;  // index into the tile list
  Sample sample;
  double transmittance;
};

// Gradient of the normalized-quaternion rotation matrix, projected onto the
// tangent space of the raw quaternion q = (w, x, y, z).
Vec4 rotation_gradient(const Quat& q_raw, const Mat3& d_r) {
  const double n = q_raw.norm();
  const Quat q = q_raw.normalized();
  const double w = q.w(), x = q.x(), y = q.y(), z = q.z();
  Mat3 dw, dx, dy, dz;
  dw << 0, -2 * z, 2 * y, 2 * z, 0, -2 * x, -2 * y, 2 * x, 0;
  dx << 0, 2 * y, 2 * z, 2 * y, -4 * x, -2 * w, 2 * z, 2 * w, -4 * x;
  dy << -4 * y, 2 * x, 2 * w, 2 * x, 0, 2 * z, -2 * w, 2 * z, -4 * y;
  dz << -4 * z, -2 * w, 2 * x, 2 * w, -4 * z, 2 * y, 2 * x, 2 * y, 0;
  const Vec4 g_unit(d_r.cwiseProduct(dw).sum(), d_r.cwiseProduct(dx).sum(),
                    d_r.cwiseProduct(dy).sum(), d_r.cwiseProduct(dz).sum());
  const Vec4 qv(w, x, y, z);
  return (g_unit - qv * qv.dot(g_unit)) / n;
}

SplatGradients to_parameters(const Splat& splat, const PreparedSplat& p, const Mat4& world_to_screen,
                             const ScreenGrad& g) {
  SplatGradients out;
  const Mat4 d_h = world_to_screen.transpose() * g.d_m;
  const Mat3 r = splat.frame();
  out.d_center = d_h.block<3, 1>(0, 3);

  const Vec3 d_col_u = d_h.block<3, 1>(0, 0);
  const Vec3 d_col_v = d_h.block<3, 1>(0, 1);
  const Vec2 d_eff_scales(r.col(0).dot(d_col_u), r.col(1).dot(d_col_v));
  Mat3 d_r = Mat3::Zero();
  d_r.col(0) = p.eff_scales.x() * d_col_u;
  d_r.col(1) = p.eff_scales.y() * d_col_v;
  out.d_rotation = rotation_gradient(splat.rotation, d_r);

  // eff = sqrt(s^2 + var), eff_opacity = opacity * prod(s / eff).
  const Vec2& s = p.scales;
  const Vec2& e = p.eff_scales;
  for (int k = 0; k < 2; ++k) {
    const double d_s = d_eff_scales[k] * s[k] / e[k] +
                       g.d_eff_opacity * p.eff_opacity * (1.0 / s[k] - s[k] / (e[k] * e[k]));
    out.d_log_scales[k] = d_s * s[k];
  }
  const double ratio = (s.x() / e.x()) * (s.y() / e.y());
  out.d_logit_opacity = g.d_eff_opacity * ratio * p.opacity * (1.0 - p.opacity);
  out.d_color = g.d_color;
  return out;
}

}  // namespace

std::vector<SplatGradients> render_backward(const Scene& scene, const Camera& camera,
                                            const RenderConfig& config, const Image& dl_dimage) {
  config.validate();
  camera.validate();
  if (dl_dimage.width != camera.width || dl_dimage.height != camera.height ||
      dl_dimage.channels != 3)
    throw InvalidArgument("loss gradient image must match the camera resolution with 3 channels");

  const std::vector<PreparedSplat> splats = detail::prepare_splats(scene, camera, config);
  const TileBinning bins = detail::bin_prepared(splats, camera, config.tile_size);
  std::vector<std::vector<ScreenGrad>> per_tile(bins.tiles.size());

  detail::parallel_for(bins.tiles.size(), config.threads, [&](std::size_t t) {
    const auto& list = bins.tiles[t];
    std::vector<ScreenGrad>& acc = per_tile[t];
    acc.assign(list.size(), ScreenGrad{});
    if (list.empty()) return;
    const int tx = int(t % bins.tiles_x);
    const int ty = int(t / bins.tiles_x);
    const int x_end = std::min(camera.width, (tx + 1) * bins.tile_size);
    const int y_end = std::min(camera.height, (ty + 1) * bins.tile_size);
    std::vector<Contribution> hits;
    Sample sample;
    for (int y = ty * bins.tile_size; y < y_end; ++y) {
      for (int x = tx * bins.tile_size; x < x_end; ++x) {
        const Vec3 g(dl_dimage.at(x, y, 0), dl_dimage.at(x, y, 1), dl_dimage.at(x, y, 2));
        if (g.isZero(0.0)) continue;
        const Vec2 pixel = detail::pixel_center(x, y);
        const std::size_t pixel_index = std::size_t(y) * camera.width + x;

        // Replay the forward blend.
        hits.clear();
        double transmittance = 1.0;
        for (std::size_t pos = 0; pos < list.size(); ++pos) {
          const PreparedSplat& s = splats[list[pos].splat];
          if (detail::shade(s, pixel, pixel_index, config, nullptr, sample) != ShadeStatus::Hit)
            continue;
          hits.push_back({int(pos), sample, transmittance});
          transmittance *= 1.0 - sample.alpha;
          if (transmittance < config.transmittance_floor) break;
        }

        // Back to front. `behind` is the color seen behind splat i divided by
        // the transmittance in front of it.
        Vec3 behind = scene.background;
        for (auto it = hits.rbegin(); it != hits.rend(); ++it) {
          const PreparedSplat& s = splats[list[it->pos].splat];
          const Sample& smp = it->sample;
          ScreenGrad& dst = acc[it->pos];
          const double a = smp.alpha;
          const double d_alpha = it->transmittance * (s.color - behind).dot(g);
          dst.d_color += a * it->transmittance * g;
          behind = a * s.color + (1.0 - a) * behind;

          const double d_kernel = d_alpha * s.eff_opacity;
          dst.d_eff_opacity += d_alpha * smp.kernel;
          if (smp.screen_branch) {
            const double inv_var = 1.0 / (config.clamp_sigma * config.clamp_sigma);
            const Vec2 d_c = d_kernel * smp.kernel * (pixel - s.center_px) * inv_var;
            backprop_center(s.transform.M, d_c, dst.d_m);
          } else {
            const Vec2 d_uv = -d_kernel * smp.kernel * (smp.cov_inv * smp.uv);
            backprop_uv(s.transform.M, pixel, d_uv, dst.d_m);
          }
        }
      }
    }
  });

  // Merge in tile order so the result does not depend on scheduling.
  std::vector<ScreenGrad> total(splats.size());
  for (std::size_t t = 0; t < bins.tiles.size(); ++t)
    for (std::size_t pos = 0; pos < bins.tiles[t].size(); ++pos)
      total[bins.tiles[t][pos].splat] += per_tile[t][pos];

  const Mat4 w = world_to_screen(camera);
  std::vector<SplatGradients> out(splats.size());
  for (std::size_t i = 0; i < splats.size(); ++i)
    if (splats[i].transform.valid) out[i] = to_parameters(scene.splats[i], splats[i], w, total[i]);
  return out;
}

}  // namespace splat2d
