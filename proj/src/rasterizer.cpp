#include "splat2d/rasterizer.hpp"

#include "parallel.hpp"
#include "raster_internal.hpp"
#include "splat2d/filters.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>

namespace splat2d {
namespace detail {

std::vector<PreparedSplat> prepare_splats(const Scene& scene, const Camera& camera,
                                          const RenderConfig& config) {
  const Mat4 w = world_to_screen(camera);
  const Vec3 eye = camera.position();
  const bool aa = config.filter_mode == FilterMode::AA;
  std::vector<PreparedSplat> out(scene.splats.size());
  for (std::size_t i = 0; i < scene.splats.size(); ++i) {
    Splat s = scene.splats[i];
    PreparedSplat& p = out[i];
    p.index = int(i);
    p.scales = s.scales();
    p.opacity = s.opacity();
    p.eff_scales = p.scales;
    p.eff_opacity = p.opacity;
    if (aa) {
      if (s.freq_bound == 0.0 && !scene.cameras.empty())
        s.freq_bound = max_sampling_rate(s.center, scene.cameras, config.near_plane);
      const SmoothedSplat sm = flat_smooth(s, config.smooth_sreg);
      p.eff_scales = sm.eff_scales;
      p.eff_opacity = sm.eff_opacity;
      p.sigma_smooth_sq = sm.sigma_smooth_sq;
    }
    p.color = s.color;
    p.normal = s.normal();
    if (p.normal.dot(eye - s.center) < 0.0) p.normal = -p.normal;
    p.transform = make_screen_transform(w, object_to_world(s, p.eff_scales), config.near_plane);
    if (p.transform.valid) {
      p.center_px = p.transform.projected_center();
      p.box = footprint_bbox(p.transform, p.eff_opacity, camera, config);
    }
  }
  return out;
}

ShadeStatus shade(const PreparedSplat& splat, const Vec2& pixel, std::size_t pixel_index,
                  const RenderConfig& config, JacobianTape* tape, Sample& out) {
  const Intersection hit = ray_splat_intersect(splat.transform, pixel);
  if (hit.degenerate) return ShadeStatus::Degenerate;
  const bool in_front = hit.depth > config.near_plane;
  out.uv = hit.uv;
  out.depth = hit.depth;
  out.screen_branch = false;

  switch (config.filter_mode) {
    case FilterMode::None:
      if (!in_front) return ShadeStatus::Miss;
      out.kernel = gaussian_local(hit.uv);
      break;
    case FilterMode::AA: {
      if (!in_front) return ShadeStatus::Miss;
      if (config.mip_sigma == 0.0) {
        out.kernel = gaussian_local(hit.uv);
        out.cov_inv.setIdentity();
        break;
      }
      Mat2 j;
      const Mat2* frozen = nullptr;
      if (tape != nullptr && tape->mode == JacobianTape::Mode::Replay)
        frozen = tape->find(splat.index, pixel_index);
      if (frozen != nullptr) {
        j = *frozen;
      } else {
        const auto live = intersect_jacobian(splat.transform, pixel);
        if (!live) return ShadeStatus::Degenerate;
        j = *live;
        if (tape != nullptr && tape->mode == JacobianTape::Mode::Record)
          tape->store(splat.index, pixel_index, j);
      }
      const Mat2 cov = mip_local_covariance(j, config.mip_sigma);
      const double det = cov.determinant();
      out.cov_inv << cov(1, 1) / det, -cov(0, 1) / det, -cov(1, 0) / det, cov(0, 0) / det;
      out.kernel = std::exp(-0.5 * hit.uv.dot(out.cov_inv * hit.uv)) / std::sqrt(det);
      break;
    }
    case FilterMode::Clamp: {
      const double obj = in_front ? gaussian_local(hit.uv) : 0.0;
      const double scr = screen_gaussian(pixel, splat.center_px, config.clamp_sigma);
      if (obj >= scr) {
        if (!in_front) return ShadeStatus::Miss;
        out.kernel = obj;
      } else {
        out.kernel = scr;
        out.screen_branch = true;
        out.depth = splat.transform.center_depth();
      }
      break;
    }
  }
  out.alpha = splat.eff_opacity * out.kernel;
  if (out.alpha < config.alpha_cutoff) return ShadeStatus::Miss;
  return ShadeStatus::Hit;
}

std::vector<int> global_order(const std::vector<PreparedSplat>& splats) {
  std::vector<int> order;
  for (const PreparedSplat& s : splats)
    if (s.transform.valid) order.push_back(s.index);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const double da = splats[a].transform.center_depth();
    const double db = splats[b].transform.center_depth();
    return da < db || (da == db && a < b);
  });
  return order;
}

TileBinning bin_prepared(const std::vector<PreparedSplat>& splats, const Camera& camera,
                         int tile_size) {
  TileBinning bins;
  bins.tile_size = tile_size;
  bins.tiles_x = (camera.width + tile_size - 1) / tile_size;
  bins.tiles_y = (camera.height + tile_size - 1) / tile_size;
  bins.tiles.resize(std::size_t(bins.tiles_x) * bins.tiles_y);
  for (const PreparedSplat& s : splats) {
    if (!s.transform.valid || s.box.empty()) continue;
    for (int ty = s.box.y0 / tile_size; ty <= s.box.y1 / tile_size; ++ty)
      for (int tx = s.box.x0 / tile_size; tx <= s.box.x1 / tile_size; ++tx)
        bins.tiles[std::size_t(ty) * bins.tiles_x + tx].push_back(
            {s.index, s.transform.center_depth()});
  }
  for (auto& list : bins.tiles)
    std::sort(list.begin(), list.end(), [](const auto& a, const auto& b) {
      return a.depth < b.depth || (a.depth == b.depth && a.splat < b.splat);
    });
  return bins;
}

namespace {

// Blends one pixel over a front-to-back candidate list. Returns the number of
// degenerate intersections encountered.
template <class Order>
std::size_t blend_pixel(const std::vector<PreparedSplat>& splats, const Order& order, int x, int y,
                        const Vec3& background, const RenderConfig& config, JacobianTape* tape,
                        RenderOutput& out) {
  const Vec2 pixel = pixel_center(x, y);
  const std::size_t pixel_index = std::size_t(y) * out.color.width + x;
  std::size_t degenerate = 0;
  double transmittance = 1.0;
  double weight_sum = 0.0;
  double depth = 0.0;
  Vec3 color = Vec3::Zero();
  Vec3 normal = Vec3::Zero();
  Sample sample;
  for (const int idx : order) {
    const PreparedSplat& s = splats[idx];
    const ShadeStatus st = shade(s, pixel, pixel_index, config, tape, sample);
    if (st == ShadeStatus::Degenerate) {
      ++degenerate;
      continue;
    }
    if (st == ShadeStatus::Miss) continue;
    const double w = sample.alpha * transmittance;
    color += w * s.color;
    normal += w * s.normal;
    depth += w * sample.depth;
    weight_sum += w;
    transmittance *= 1.0 - sample.alpha;
    if (transmittance < config.transmittance_floor) break;
  }
  color += transmittance * background;
  for (int c = 0; c < 3; ++c) {
    out.color.at(x, y, c) = color[c];
    out.normal.at(x, y, c) = normal[c];
  }
  out.alpha.at(x, y) = 1.0 - transmittance;
  out.depth.at(x, y) = weight_sum > 0.0 ? depth / weight_sum : 0.0;
  return degenerate;
}

RenderOutput allocate_output(const Camera& camera) {
  RenderOutput out;
  out.color = Image(camera.width, camera.height, 3);
  out.alpha = Image(camera.width, camera.height, 1);
  out.depth = Image(camera.width, camera.height, 1);
  out.normal = Image(camera.width, camera.height, 3);
  return out;
}

struct SplatIndexRange {
  const std::vector<TileBinning::Entry>& entries;
  struct It {
    std::vector<TileBinning::Entry>::const_iterator it;
    int operator*() const { return it->splat; }
    It& operator++() {
      ++it;
      return *this;
    }
    bool operator!=(const It& o) const { return it != o.it; }
  };
  It begin() const { return {entries.begin()}; }
  It end() const { return {entries.end()}; }
};

}  // namespace

RenderOutput render_with(const Scene& scene, const Camera& camera, const RenderConfig& config,
                         bool tiled, JacobianTape* tape) {
  config.validate();
  camera.validate();
  const std::vector<PreparedSplat> splats = prepare_splats(scene, camera, config);
  RenderOutput out = allocate_output(camera);
  std::atomic<std::size_t> degenerate{0};

  if (tiled) {
    const TileBinning bins = bin_prepared(splats, camera, config.tile_size);
    parallel_for(bins.tiles.size(), config.threads, [&](std::size_t t) {
      const int tx = int(t % bins.tiles_x);
      const int ty = int(t / bins.tiles_x);
      const SplatIndexRange order{bins.tiles[t]};
      std::size_t local = 0;
      const int x_end = std::min(camera.width, (tx + 1) * bins.tile_size);
      const int y_end = std::min(camera.height, (ty + 1) * bins.tile_size);
      for (int y = ty * bins.tile_size; y < y_end; ++y)
        for (int x = tx * bins.tile_size; x < x_end; ++x)
          local += blend_pixel(splats, order, x, y, scene.background, config, tape, out);
      degenerate += local;
    });
  } else {
    const std::vector<int> order = global_order(splats);
    parallel_for(std::size_t(camera.height), config.threads, [&](std::size_t y) {
      std::size_t local = 0;
      for (int x = 0; x < camera.width; ++x)
        local += blend_pixel(splats, order, x, int(y), scene.background, config, tape, out);
      degenerate += local;
    });
  }
  out.degenerate_skips = degenerate.load();
  return out;
}

}  // namespace detail

TileBinning bin_splats(const Scene& scene, const Camera& camera, const RenderConfig& config) {
  config.validate();
  return detail::bin_prepared(detail::prepare_splats(scene, camera, config), camera,
                              config.tile_size);
}

RenderOutput render(const Scene& scene, const Camera& camera, const RenderConfig& config) {
  return detail::render_with(scene, camera, config, true, nullptr);
}

RenderOutput render_reference(const Scene& scene, const Camera& camera, const RenderConfig& config) {
  return detail::render_with(scene, camera, config, false, nullptr);
}

Image box_downsample(const Image& image, int factor) {
  if (factor < 1) throw InvalidArgument("downsample factor must be positive");
  if (image.width % factor != 0 || image.height % factor != 0)
    throw InvalidArgument("image dimensions are not divisible by the downsample factor");
  Image out(image.width / factor, image.height / factor, image.channels);
  const double norm = 1.0 / double(factor * factor);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x)
      for (int c = 0; c < image.channels; ++c) {
        double sum = 0.0;
        for (int dy = 0; dy < factor; ++dy)
          for (int dx = 0; dx < factor; ++dx) sum += image.at(x * factor + dx, y * factor + dy, c);
        out.at(x, y, c) = sum * norm;
      }
  return out;
}

Image supersample_reference(const Scene& scene, const Camera& camera, int factor,
                            const RenderConfig& config) {
  if (factor != 1 && factor != 2 && factor != 4 && factor != 8)
    throw InvalidArgument("supersampling factor must be 1, 2, 4 or 8");
  RenderConfig plain = config;
  plain.filter_mode = FilterMode::None;
  if (factor == 1) return render(scene, camera, plain).color;
  const Camera hi = camera.scaled(factor);
  return box_downsample(render(scene, hi, plain).color, factor);
}

}  // namespace splat2d
