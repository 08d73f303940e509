#include "splat2d/fit.hpp"

#include "random.hpp"
#include "raster_internal.hpp"
#include "splat2d/filters.hpp"
#include "splat2d/metrics.hpp"
#include "splat2d/rasterizer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace splat2d {

const char* to_string(ParamGroup group) {
  switch (group) {
    case ParamGroup::Center: return "center";
    case ParamGroup::Rotation: return "rotation";
    case ParamGroup::Scales: return "scales";
    case ParamGroup::Opacity: return "opacity";
    case ParamGroup::Color: return "color";
  }
  return "?";
}

ParamGroup param_group_of(int slot) {
  if (slot < 3) return ParamGroup::Center;
  if (slot < 7) return ParamGroup::Rotation;
  if (slot < 9) return ParamGroup::Scales;
  if (slot < 10) return ParamGroup::Opacity;
  return ParamGroup::Color;
}

double& param_slot(Splat& splat, int slot) {
  switch (slot) {
    case 0: case 1: case 2: return splat.center[slot];
    case 3: return splat.rotation.w();
    case 4: return splat.rotation.x();
    case 5: return splat.rotation.y();
    case 6: return splat.rotation.z();
    case 7: case 8: return splat.log_scales[slot - 7];
    case 9: return splat.logit_opacity;
    case 10: case 11: case 12: return splat.color[slot - 10];
  }
  throw InvalidArgument("parameter slot out of range");
}

double gradient_slot(const SplatGradients& g, int slot) {
  if (slot < 3) return g.d_center[slot];
  if (slot < 7) return g.d_rotation[slot - 3];
  if (slot < 9) return g.d_log_scales[slot - 7];
  if (slot < 10) return g.d_logit_opacity;
  if (slot < 13) return g.d_color[slot - 10];
  throw InvalidArgument("parameter slot out of range");
}

namespace {

double& gradient_slot_ref(SplatGradients& g, int slot) {
  if (slot < 3) return g.d_center[slot];
  if (slot < 7) return g.d_rotation[slot - 3];
  if (slot < 9) return g.d_log_scales[slot - 7];
  if (slot < 10) return g.d_logit_opacity;
  return g.d_color[slot - 10];
}

double weighted_sum(const Image& image, const Image& weights) {
  double s = 0.0;
  for (std::size_t i = 0; i < image.data.size(); ++i) s += image.data[i] * weights.data[i];
  return s;
}

}  // namespace

std::vector<SplatGradients> finite_diff_gradients(const Scene& scene, const Camera& camera,
                                                  const RenderConfig& config, const Image& weights,
                                                  JacobianHandling jacobians) {
  // Frequency bounds are constants of the gradient: pin them before perturbing.
  Scene base = scene;
  if (config.filter_mode == FilterMode::AA && !base.cameras.empty())
    for (Splat& s : base.splats)
      if (s.freq_bound == 0.0)
        s.freq_bound = max_sampling_rate(s.center, base.cameras, config.near_plane);

  std::optional<detail::JacobianTape> tape;
  if (jacobians == JacobianHandling::Frozen && config.filter_mode == FilterMode::AA) {
    tape.emplace(base.splats.size(), camera.width, camera.height);
    tape->mode = detail::JacobianTape::Mode::Record;
    detail::render_with(base, camera, config, true, &*tape);
    tape->mode = detail::JacobianTape::Mode::Replay;
  }
  auto loss = [&](const Scene& s) {
    return weighted_sum(detail::render_with(s, camera, config, true, tape ? &*tape : nullptr).color,
                        weights);
  };

  std::vector<SplatGradients> out(base.splats.size());
  Scene probe = base;
  for (std::size_t i = 0; i < base.splats.size(); ++i) {
    for (int slot = 0; slot < kParamsPerSplat; ++slot) {
      double& p = param_slot(probe.splats[i], slot);
      const double original = p;
      double estimate = 0.0;
      // A step straddling a kink (clamp max switch) is caught by comparing
      // with the next smaller step.
      for (double h = 1e-4; h >= 0.99e-6; h *= 0.1) {
        p = original + h;
        const double plus = loss(probe);
        p = original - h;
        const double minus = loss(probe);
        p = original;
        const double previous = estimate;
        estimate = (plus - minus) / (2.0 * h);
        if (h < 1e-4 && std::abs(estimate - previous) <= 1e-5 * std::max(std::abs(estimate), 1e-6)) break;
      }
      gradient_slot_ref(out[i], slot) = estimate;
    }
  }
  return out;
}

double GradCheckReport::worst() const {
  return *std::max_element(worst_rel_error.begin(), worst_rel_error.end());
}

GradCheckReport compare_gradients(std::span<const SplatGradients> analytic,
                                  std::span<const SplatGradients> reference, double min_magnitude) {
  if (analytic.size() != reference.size())
    throw InvalidArgument("gradient lists have different lengths");
  GradCheckReport report;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    for (int slot = 0; slot < kParamsPerSplat; ++slot) {
      const double a = gradient_slot(analytic[i], slot);
      const double b = gradient_slot(reference[i], slot);
      const double scale = std::max(std::abs(a), std::abs(b));
      if (!(scale > min_magnitude)) continue;
      const auto g = std::size_t(param_group_of(slot));
      report.worst_rel_error[g] = std::max(report.worst_rel_error[g], std::abs(a - b) / scale);
      ++report.checked[g];
    }
  }
  return report;
}

RenderConfig gradcheck_render_config(FilterMode mode) {
  RenderConfig c;
  c.filter_mode = mode;
  c.alpha_cutoff = 1e-10;
  c.transmittance_floor = 1e-12;
  return c;
}

Scene gradcheck_scene(std::uint64_t seed, int splats) {
  detail::Rng rng(seed);
  Scene scene;
  Camera cam;
  cam.fx = cam.fy = 32.0;
  cam.cx = cam.cy = 16.0;
  cam.width = cam.height = 32;
  scene.cameras.push_back(cam);
  scene.background = Vec3(0.1, 0.2, 0.3);
  for (int i = 0; i < splats; ++i) {
    // Depth strata keep the sort order stable under finite-difference probes.
    const double depth = 2.5 + 1.5 * (i + rng.uniform(0.1, 0.9)) / splats;
    const Vec3 center(rng.uniform(-0.5, 0.5) * depth * 0.5, rng.uniform(-0.5, 0.5) * depth * 0.5,
                      depth);
    // Tilted at most ~50 degrees away from the viewing axis.
    const Vec3 axis = Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)).normalized();
    const Quat tilt(Eigen::AngleAxisd(rng.uniform(0.0, 0.85), axis));
    const Quat spin(Eigen::AngleAxisd(rng.uniform(0.0, 6.283), Vec3::UnitZ()));
    const Vec2 scales(rng.uniform(0.03, 0.45), rng.uniform(0.03, 0.45));
    const double opacity = rng.uniform(0.3, 0.9);
    const Vec3 color(rng.uniform(), rng.uniform(), rng.uniform());
    scene.splats.push_back(Splat::from_physical(center, tilt * spin, scales, opacity, color));
  }
  return scene;
}

void FitConfig::validate() const {
  if (iterations < 1) throw InvalidArgument("iterations must be at least 1");
  if (freq_recompute_interval < 1) throw InvalidArgument("freq_recompute_interval must be >= 1");
  if (!(loss_lambda >= 0.0 && loss_lambda <= 1.0))
    throw InvalidArgument("loss_lambda must lie in [0, 1]");
  render.validate();
}

double photometric_loss(const Image& rendered, const Image& target, double lambda,
                        Image* dl_dimage) {
  if (!rendered.same_shape(target)) throw InvalidArgument("rendered and target images differ in size");
  const double n = double(rendered.data.size());
  double l1 = 0.0;
  for (std::size_t i = 0; i < rendered.data.size(); ++i)
    l1 += std::abs(rendered.data[i] - target.data[i]);
  l1 /= n;
  double loss = (1.0 - lambda) * l1;
  if (dl_dimage != nullptr) {
    *dl_dimage = Image(rendered.width, rendered.height, rendered.channels);
    for (std::size_t i = 0; i < rendered.data.size(); ++i) {
      const double d = rendered.data[i] - target.data[i];
      dl_dimage->data[i] = (1.0 - lambda) * double((d > 0.0) - (d < 0.0)) / n;
    }
  }
  if (lambda > 0.0) {
    if (dl_dimage != nullptr) {
      Image grad;
      loss += lambda * (1.0 - ssim_with_gradient(rendered, target, grad));
      for (std::size_t i = 0; i < grad.data.size(); ++i) dl_dimage->data[i] -= lambda * grad.data[i];
    } else {
      loss += lambda * (1.0 - ssim(rendered, target));
    }
  }
  return loss;
}

namespace {

double scene_extent(const Scene& scene) {
  if (scene.splats.empty()) return 1.0;
  Vec3 centroid = Vec3::Zero();
  for (const Splat& s : scene.splats) centroid += s.center;
  centroid /= double(scene.splats.size());
  double r = 0.0;
  for (const Splat& s : scene.splats) r = std::max(r, (s.center - centroid).norm());
  return r > 1e-9 ? r : 1.0;
}

}  // namespace

FitResult fit(const Scene& initial, std::span<const Target> targets, const FitConfig& config,
              const std::function<void(int, double)>& on_iteration) {
  config.validate();
  if (targets.empty()) throw InvalidArgument("fit needs at least one target view");
  std::vector<Camera> target_cameras;
  for (const Target& t : targets) {
    if (t.image.width != t.camera.width || t.image.height != t.camera.height ||
        t.image.channels != 3)
      throw InvalidArgument("target image does not match its camera");
    target_cameras.push_back(t.camera);
  }

  FitResult result;
  Scene& scene = result.scene;
  scene = initial;
  const std::size_t n = scene.splats.size();
  const double extent = scene_extent(scene);

  std::array<double, kParamGroupCount> lr = {config.lr_center * extent, config.lr_rotation,
                                             config.lr_scales, config.lr_opacity, config.lr_color};
  std::vector<double> m(n * kParamsPerSplat, 0.0), v(n * kParamsPerSplat, 0.0);
  std::vector<SplatGradients> grads(n);
  const double inv_views = 1.0 / double(targets.size());

  for (int it = 0; it < config.iterations; ++it) {
    if (it % config.freq_recompute_interval == 0)
      compute_freq_bounds(scene.splats, target_cameras, config.render.near_plane);

    std::fill(grads.begin(), grads.end(), SplatGradients{});
    double loss = 0.0;
    for (const Target& t : targets) {
      const Image rendered = render(scene, t.camera, config.render).color;
      Image dl;
      loss += inv_views * photometric_loss(rendered, t.image, config.loss_lambda, &dl);
      const auto g = render_backward(scene, t.camera, config.render, dl);
      for (std::size_t i = 0; i < n; ++i)
        for (int slot = 0; slot < kParamsPerSplat; ++slot)
          gradient_slot_ref(grads[i], slot) += inv_views * gradient_slot(g[i], slot);
    }
    if (!std::isfinite(loss))
      throw std::runtime_error("fit diverged: non-finite loss at iteration " + std::to_string(it));
    result.loss_trace.push_back(loss);
    if (on_iteration) on_iteration(it, loss);

    const double progress = config.iterations > 1 ? double(it) / (config.iterations - 1) : 0.0;
    lr[0] = config.lr_center * extent * std::pow(config.lr_center_final_ratio, progress);
    const double bias1 = 1.0 - std::pow(config.adam_beta1, it + 1);
    const double bias2 = 1.0 - std::pow(config.adam_beta2, it + 1);
    for (std::size_t i = 0; i < n; ++i) {
      Splat& s = scene.splats[i];
      const Quat before = s.rotation;
      for (int slot = 0; slot < kParamsPerSplat; ++slot) {
        const std::size_t k = i * kParamsPerSplat + slot;
        const double g = gradient_slot(grads[i], slot);
        m[k] = config.adam_beta1 * m[k] + (1.0 - config.adam_beta1) * g;
        v[k] = config.adam_beta2 * v[k] + (1.0 - config.adam_beta2) * g * g;
        const double step = (m[k] / bias1) / (std::sqrt(v[k] / bias2) + config.adam_eps);
        param_slot(s, slot) -= lr[std::size_t(param_group_of(slot))] * step;
      }
      // Renormalizing an untouched quaternion can still move it by an ulp.
      if (s.rotation.coeffs() != before.coeffs()) s.rotation.normalize();
      s.color = s.color.cwiseMax(0.0).cwiseMin(1.0);
    }
  }
  return result;
}

}  // namespace splat2d
