#pragma once

#include "splat2d/core.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace splat2d {

/// Malformed scene document; the message starts with the offending field path.
class SceneFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kSceneFormatVersion = 1;

/// Scene document:
///
///   {
///     "version": 1,
///     "background": [r, g, b],
///     "cameras": [{"fx", "fy", "cx", "cy", "width", "height",
///                  "world_to_camera": [16 numbers, row-major]}],
///     "splats": [{"center": [3], "rotation": [w, x, y, z], "scales": [2],
///                 "opacity": a, "color": [3], "freq_bound": optional}]
///   }
///
/// Scales and opacity are the physical values. Unknown fields are rejected.
Scene scene_from_json(const nlohmann::json& doc, std::vector<std::string>* warnings = nullptr);
nlohmann::json scene_to_json(const Scene& scene);

Scene load_scene(const std::filesystem::path& path, std::vector<std::string>* warnings = nullptr);
void save_scene(const Scene& scene, const std::filesystem::path& path);

}  // namespace splat2d
