#include "splat2d/scene_io.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

namespace splat2d {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw SceneFormatError(path + ": " + what);
}

void reject_unknown(const json& obj, const std::string& path,
                    std::initializer_list<const char*> known) {
  const std::set<std::string> allowed(known.begin(), known.end());
  for (const auto& [key, value] : obj.items())
    if (!allowed.count(key)) fail(path + "." + key, "unknown field");
}

const json& require(const json& obj, const std::string& path, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) fail(path + "." + key, "missing required field");
  return *it;
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(path, "value is not finite");
  return d;
}

int integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) fail(path, "expected an integer");
  return v.get<int>();
}

std::vector<double> numbers(const json& v, const std::string& path, std::size_t count) {
  if (!v.is_array()) fail(path, "expected an array of " + std::to_string(count) + " numbers");
  if (v.size() != count)
    fail(path, "expected " + std::to_string(count) + " numbers, got " + std::to_string(v.size()));
  std::vector<double> out;
  for (std::size_t i = 0; i < count; ++i)
    out.push_back(number(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

Camera parse_camera(const json& c, const std::string& path) {
  if (!c.is_object()) fail(path, "expected an object");
  reject_unknown(c, path, {"fx", "fy", "cx", "cy", "width", "height", "world_to_camera"});
  Camera cam;
  cam.fx = number(require(c, path, "fx"), path + ".fx");
  cam.fy = number(require(c, path, "fy"), path + ".fy");
  cam.cx = number(require(c, path, "cx"), path + ".cx");
  cam.cy = number(require(c, path, "cy"), path + ".cy");
  cam.width = integer(require(c, path, "width"), path + ".width");
  cam.height = integer(require(c, path, "height"), path + ".height");
  const auto m = numbers(require(c, path, "world_to_camera"), path + ".world_to_camera", 16);
  for (int r = 0; r < 4; ++r)
    for (int k = 0; k < 4; ++k) cam.world_to_camera(r, k) = m[r * 4 + k];
  try {
    cam.validate();
  } catch (const InvalidArgument& e) {
    fail(path, e.what());
  }
  return cam;
}

Splat parse_splat(const json& s, const std::string& path, std::vector<std::string>* warnings) {
  if (!s.is_object()) fail(path, "expected an object");
  reject_unknown(s, path, {"center", "rotation", "scales", "opacity", "color", "freq_bound"});
  const auto center = numbers(require(s, path, "center"), path + ".center", 3);
  const auto rot = numbers(require(s, path, "rotation"), path + ".rotation", 4);
  const auto scales = numbers(require(s, path, "scales"), path + ".scales", 2);
  const double opacity = number(require(s, path, "opacity"), path + ".opacity");
  const auto color = numbers(require(s, path, "color"), path + ".color", 3);

  Splat out;
  out.center = Vec3(center[0], center[1], center[2]);
  const Quat q(rot[0], rot[1], rot[2], rot[3]);
  const double norm = q.norm();
  if (!(norm > 0.0)) fail(path + ".rotation", "quaternion has zero norm");
  if (std::abs(norm - 1.0) > 1e-6 && warnings != nullptr)
    warnings->push_back(path + ".rotation: renormalized quaternion with norm " +
                        std::to_string(norm));
  // Already-unit quaternions are kept bit-for-bit.
  out.rotation = std::abs(norm - 1.0) > 1e-12 ? q.normalized() : q;
  for (int k = 0; k < 2; ++k) {
    if (!(scales[k] > 0.0)) fail(path + ".scales[" + std::to_string(k) + "]", "must be positive");
    out.log_scales[k] = std::log(scales[k]);
  }
  if (!(opacity > 0.0 && opacity < 1.0)) fail(path + ".opacity", "must lie strictly between 0 and 1");
  out.logit_opacity = logit(opacity);
  out.color = Vec3(color[0], color[1], color[2]);
  if (s.contains("freq_bound")) {
    out.freq_bound = number(s["freq_bound"], path + ".freq_bound");
    if (out.freq_bound < 0.0) fail(path + ".freq_bound", "must be non-negative");
  }
  return out;
}

}  // namespace

Scene scene_from_json(const json& doc, std::vector<std::string>* warnings) {
  if (!doc.is_object()) fail("$", "expected a JSON object");
  reject_unknown(doc, "$", {"version", "background", "cameras", "splats"});
  const int version = integer(require(doc, "$", "version"), "$.version");
  if (version != kSceneFormatVersion)
    fail("$.version", "unsupported version " + std::to_string(version));
  Scene scene;
  const auto bg = numbers(require(doc, "$", "background"), "$.background", 3);
  scene.background = Vec3(bg[0], bg[1], bg[2]);

  const json& cams = require(doc, "$", "cameras");
  if (!cams.is_array()) fail("$.cameras", "expected an array");
  for (std::size_t i = 0; i < cams.size(); ++i)
    scene.cameras.push_back(parse_camera(cams[i], "$.cameras[" + std::to_string(i) + "]"));

  const json& splats = require(doc, "$", "splats");
  if (!splats.is_array()) fail("$.splats", "expected an array");
  for (std::size_t i = 0; i < splats.size(); ++i)
    scene.splats.push_back(
        parse_splat(splats[i], "$.splats[" + std::to_string(i) + "]", warnings));
  return scene;
}

json scene_to_json(const Scene& scene) {
  json doc;
  doc["version"] = kSceneFormatVersion;
  doc["background"] = {scene.background.x(), scene.background.y(), scene.background.z()};
  doc["cameras"] = json::array();
  for (const Camera& c : scene.cameras) {
    json m = json::array();
    for (int r = 0; r < 4; ++r)
      for (int k = 0; k < 4; ++k) m.push_back(c.world_to_camera(r, k));
    doc["cameras"].push_back({{"fx", c.fx},
                              {"fy", c.fy},
                              {"cx", c.cx},
                              {"cy", c.cy},
                              {"width", c.width},
                              {"height", c.height},
                              {"world_to_camera", m}});
  }
  doc["splats"] = json::array();
  for (const Splat& s : scene.splats) {
    const Vec2 sc = s.scales();
    json js = {{"center", {s.center.x(), s.center.y(), s.center.z()}},
               {"rotation", {s.rotation.w(), s.rotation.x(), s.rotation.y(), s.rotation.z()}},
               {"scales", {sc.x(), sc.y()}},
               {"opacity", s.opacity()},
               {"color", {s.color.x(), s.color.y(), s.color.z()}}};
    if (s.freq_bound != 0.0) js["freq_bound"] = s.freq_bound;
    doc["splats"].push_back(std::move(js));
  }
  return doc;
}

Scene load_scene(const std::filesystem::path& path, std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw SceneFormatError(path.string() + ": cannot open file");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SceneFormatError(path.string() + ": malformed JSON: " + e.what());
  }
  return scene_from_json(doc, warnings);
}

void save_scene(const Scene& scene, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw SceneFormatError(path.string() + ": cannot open file for writing");
  out << scene_to_json(scene).dump(2) << '\n';
  if (!out) throw SceneFormatError(path.string() + ": write failed");
}

}  // namespace splat2d
