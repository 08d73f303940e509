#pragma once

#include "splat2d/core.hpp"

#include <cstdint>
#include <string>

namespace splat2d {

enum class SceneKind { Grid, CheckerSphere, Random };

SceneKind parse_scene_kind(const std::string& name);
const char* to_string(SceneKind kind);

/// Knobs shared by the procedural scenes; each kind reads what applies.
struct GenParams {
  /// grid: splats per lattice side; checker-sphere: latitude rings
  /// (twice as many segments); random: number of splats.
  int count = 16;
  /// grid: lattice half-width; checker-sphere: radius; random: box half-size.
  double extent = 1.0;
  std::uint64_t seed = 0;
  /// Square training image size in pixels; focal length equals it.
  int image_size = 128;
  int views = 1;

  void validate() const;
};

/// Deterministic for a given `params` (including the seed).
///
/// grid: fronto-parallel lattice of small alternating-color splats at depth
/// 4 in front of the first camera, about four pixels apart in the training
/// view. checker-sphere: splats tangent to a sphere with alternating colors,
/// seen by cameras on a circle around it. random: uniformly random splats in
/// a box in front of the cameras.
Scene gen_scene(SceneKind kind, const GenParams& params);

/// FNV-1a over the bit patterns of every splat parameter and camera field.
std::uint64_t scene_checksum(const Scene& scene);

}  // namespace splat2d
