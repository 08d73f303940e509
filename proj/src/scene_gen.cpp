#include "splat2d/scene_gen.hpp"

#include "random.hpp"

#include <bit>
#include <cmath>
#include <numbers>

namespace splat2d {

SceneKind parse_scene_kind(const std::string& name) {
  if (name == "grid") return SceneKind::Grid;
  if (name == "checker-sphere") return SceneKind::CheckerSphere;
  if (name == "random") return SceneKind::Random;
  throw InvalidArgument("unknown scene kind '" + name + "' (expected grid, checker-sphere or random)");
}

const char* to_string(SceneKind kind) {
  switch (kind) {
    case SceneKind::Grid: return "grid";
    case SceneKind::CheckerSphere: return "checker-sphere";
    case SceneKind::Random: return "random";
  }
  return "?";
}

void GenParams::validate() const {
  if (count < 1) throw InvalidArgument("scene count must be at least 1");
  if (!(extent > 0.0) || !std::isfinite(extent)) throw InvalidArgument("scene extent must be positive");
  if (image_size < 8) throw InvalidArgument("image size must be at least 8");
  if (views < 1) throw InvalidArgument("views must be at least 1");
}

namespace {

constexpr double kGridDepth = 4.0;
const Vec3 kWarm(0.95, 0.8, 0.2);
const Vec3 kCool(0.1, 0.35, 0.9);

// Cameras at the origin region looking down +z, spread sideways for extra views.
void add_forward_cameras(Scene& scene, const GenParams& p, double target_depth) {
  const double f = p.image_size;
  for (int v = 0; v < p.views; ++v) {
    const double offset = v == 0 ? 0.0 : 0.25 * p.extent * ((v % 2) ? 1.0 : -1.0) * ((v + 1) / 2);
    const Vec3 eye(offset, 0.0, 0.0);
    scene.cameras.push_back(Camera::look_at(eye, Vec3(0.0, 0.0, target_depth), -Vec3::UnitY(), f,
                                            p.image_size, p.image_size));
  }
}

Scene make_grid(const GenParams& p) {
  Scene scene;
  scene.background = Vec3(0.05, 0.05, 0.05);
  add_forward_cameras(scene, p, kGridDepth);
  const double spacing = 2.0 * p.extent / p.count;
  const double scale = 0.25 * spacing;
  for (int j = 0; j < p.count; ++j)
    for (int i = 0; i < p.count; ++i) {
      const Vec3 center(-p.extent + (i + 0.5) * spacing, -p.extent + (j + 0.5) * spacing,
                        kGridDepth);
      const Vec3 color = ((i + j) % 2 == 0) ? kWarm : kCool;
      scene.splats.push_back(
          Splat::from_physical(center, Quat::Identity(), Vec2(scale, scale), 0.9, color));
    }
  return scene;
}

Scene make_checker_sphere(const GenParams& p) {
  using std::numbers::pi;
  Scene scene;
  scene.background = Vec3(0.0, 0.0, 0.0);
  const double r = p.extent;
  const double distance = 3.0 * r;
  for (int v = 0; v < p.views; ++v) {
    const double phi = 2.0 * pi * v / p.views;
    const Vec3 eye(distance * std::sin(phi), -0.3 * r, -distance * std::cos(phi));
    scene.cameras.push_back(Camera::look_at(eye, Vec3::Zero(), -Vec3::UnitY(), p.image_size,
                                            p.image_size, p.image_size));
  }
  const int rings = p.count;
  const int segments = 2 * p.count;
  const double step = pi / rings;
  for (int a = 0; a < rings; ++a) {
    const double theta = (a + 0.5) * step;  // polar angle from +y
    for (int b = 0; b < segments; ++b) {
      const double phi = (b + 0.5) * 2.0 * pi / segments;
      const Vec3 n(std::sin(theta) * std::cos(phi), std::cos(theta), std::sin(theta) * std::sin(phi));
      const Vec3 t_u = Vec3(-std::sin(phi), 0.0, std::cos(phi));
      const Vec3 t_v = n.cross(t_u);
      Mat3 frame;
      frame << t_u, t_v, t_u.cross(t_v);
      const double su = 0.5 * r * std::sin(theta) * 2.0 * pi / segments + 1e-3 * r;
      const double sv = 0.5 * r * step;
      const Vec3 color = ((a + b) % 2 == 0) ? Vec3(0.9, 0.9, 0.9) : Vec3(0.8, 0.1, 0.1);
      scene.splats.push_back(
          Splat::from_physical(r * n, Quat(frame), Vec2(su, sv), 0.95, color));
    }
  }
  return scene;
}

Scene make_random(const GenParams& p) {
  detail::Rng rng(p.seed);
  Scene scene;
  scene.background = Vec3(0.0, 0.0, 0.0);
  const double depth = 3.0 * p.extent + 1.0;
  add_forward_cameras(scene, p, depth);
  for (int i = 0; i < p.count; ++i) {
    const Vec3 center(rng.uniform(-p.extent, p.extent), rng.uniform(-p.extent, p.extent),
                      depth + rng.uniform(-p.extent, p.extent));
    Quat q(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    if (q.norm() < 1e-6) q = Quat::Identity();
    const Vec2 scales(rng.uniform(0.05, 0.3) * p.extent, rng.uniform(0.05, 0.3) * p.extent);
    const double opacity = rng.uniform(0.2, 0.95);
    const Vec3 color(rng.uniform(), rng.uniform(), rng.uniform());
    scene.splats.push_back(Splat::from_physical(center, q.normalized(), scales, opacity, color));
  }
  return scene;
}

struct Fnv1a {
  std::uint64_t h = 1469598103934665603ull;
  void add(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xffu;
      h *= 1099511628211ull;
    }
  }
  void add(double d) { add(std::bit_cast<std::uint64_t>(d)); }
};

}  // namespace

Scene gen_scene(SceneKind kind, const GenParams& params) {
  params.validate();
  switch (kind) {
    case SceneKind::Grid: return make_grid(params);
    case SceneKind::CheckerSphere: return make_checker_sphere(params);
    case SceneKind::Random: return make_random(params);
  }
  throw InvalidArgument("unknown scene kind");
}

std::uint64_t scene_checksum(const Scene& scene) {
  Fnv1a f;
  for (int c = 0; c < 3; ++c) f.add(scene.background[c]);
  for (const Camera& cam : scene.cameras) {
    f.add(cam.fx);
    f.add(cam.fy);
    f.add(cam.cx);
    f.add(cam.cy);
    f.add(std::uint64_t(cam.width));
    f.add(std::uint64_t(cam.height));
    for (int i = 0; i < 16; ++i) f.add(cam.world_to_camera(i / 4, i % 4));
  }
  for (const Splat& s : scene.splats) {
    for (int k = 0; k < 3; ++k) f.add(s.center[k]);
    f.add(s.rotation.w());
    f.add(s.rotation.x());
    f.add(s.rotation.y());
    f.add(s.rotation.z());
    f.add(s.log_scales[0]);
    f.add(s.log_scales[1]);
    f.add(s.logit_opacity);
    for (int k = 0; k < 3; ++k) f.add(s.color[k]);
    f.add(s.freq_bound);
  }
  return f.h;
}

}  // namespace splat2d
