#pragma once

#include "splat2d/core.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace splat2d {

/// Gradient of a scalar loss w.r.t. one splat's unconstrained parameters.
struct SplatGradients {
  Vec3 d_center = Vec3::Zero();
  Vec4 d_rotation = Vec4::Zero();  // (w, x, y, z), tangent to the unit sphere
  Vec2 d_log_scales = Vec2::Zero();
  double d_logit_opacity = 0.0;
  Vec3 d_color = Vec3::Zero();
};

/// Parameter groups, in the order used by reports and flattening.
enum class ParamGroup { Center, Rotation, Scales, Opacity, Color };
inline constexpr int kParamGroupCount = 5;
inline constexpr int kParamsPerSplat = 13;
const char* to_string(ParamGroup group);
ParamGroup param_group_of(int slot);

/// Flat accessors over the 13 scalar parameters of a splat / its gradient.
double& param_slot(Splat& splat, int slot);
double gradient_slot(const SplatGradients& g, int slot);

/// Gradients of L = sum(dl_dimage * color) w.r.t. every splat. The Mip filter
/// covariance is treated as a constant (no gradient through the Jacobian),
/// and so are the frequency bounds.
std::vector<SplatGradients> render_backward(const Scene& scene, const Camera& camera,
                                            const RenderConfig& config, const Image& dl_dimage);

enum class JacobianHandling {
  Live,    // the forward pass recomputes J for every perturbation
  Frozen,  // J recorded at the unperturbed parameters and replayed
};

/// Central differences of L = sum(weights * color) with render() as a black
/// box. Steps: 1e-4, or 1e-3 for center coordinates.
std::vector<SplatGradients> finite_diff_gradients(const Scene& scene, const Camera& camera,
                                                  const RenderConfig& config, const Image& weights,
                                                  JacobianHandling jacobians);

struct GradCheckReport {
  std::array<double, kParamGroupCount> worst_rel_error{};
  std::array<int, kParamGroupCount> checked{};
  double worst() const;
  bool passed(double tolerance) const { return worst() < tolerance; }
};

/// Relative error |a - b| / max(|a|, |b|) over parameters whose magnitude
/// exceeds `min_magnitude`, worst case per parameter group.
GradCheckReport compare_gradients(std::span<const SplatGradients> analytic,
                                  std::span<const SplatGradients> reference,
                                  double min_magnitude = 1e-6);

/// Render settings for gradient checks: the alpha cutoff and early
/// termination are pushed far down so that no contribution switches on or
/// off within a finite-difference step.
RenderConfig gradcheck_render_config(FilterMode mode);

/// Random scene of `splats` splats facing a 32x32 camera, for gradient checks.
Scene gradcheck_scene(std::uint64_t seed, int splats);

struct Target {
  Camera camera;
  Image image;
};

struct FitConfig {
  int iterations = 1000;
  double lr_center = 1.6e-4;  // multiplied by the scene extent
  double lr_center_final_ratio = 0.01;
  double lr_rotation = 1e-3;
  double lr_scales = 5e-3;
  double lr_opacity = 5e-2;
  double lr_color = 2.5e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-15;
  /// Weight of the D-SSIM term: (1 - lambda) L1 + lambda (1 - SSIM).
  double loss_lambda = 0.2;
  int freq_recompute_interval = 100;
  RenderConfig render;

  void validate() const;
};

struct FitResult {
  Scene scene;
  std::vector<double> loss_trace;  // loss before each update
};

/// Loss value and its gradient w.r.t. the rendered image.
double photometric_loss(const Image& rendered, const Image& target, double lambda,
                        Image* dl_dimage);

/// Adam on all splat parameters against the given views. The splat count is
/// fixed. Frequency bounds are refreshed from the target cameras every
/// `freq_recompute_interval` iterations. Throws std::runtime_error when the
/// loss stops being finite.
FitResult fit(const Scene& initial, std::span<const Target> targets, const FitConfig& config,
              const std::function<void(int, double)>& on_iteration = {});

}  // namespace splat2d
