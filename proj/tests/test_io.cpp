#include "doctest.h"
#include "oracles.hpp"

#include "splat2d/image_io.hpp"
#include "splat2d/scene_gen.hpp"
#include "splat2d/scene_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

using namespace splat2d;
using nlohmann::json;

namespace {

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("splat2d_test_" + name);
}

bool within_ulps(double a, double b, int ulps) {
  return std::abs(a - b) <= ulps * std::numeric_limits<double>::epsilon() * std::max(std::abs(a), std::abs(b));
}

json minimal_doc() {
  return json::parse(R"({
    "version": 1,
    "background": [0, 0, 0],
    "cameras": [{"fx": 10, "fy": 10, "cx": 5, "cy": 5, "width": 10, "height": 10,
                 "world_to_camera": [1,0,0,0, 0,1,0,0, 0,0,1,0, 0,0,0,1]}],
    "splats": [{"center": [0, 0, 2], "rotation": [1, 0, 0, 0], "scales": [0.5, 0.25],
                "opacity": 0.5, "color": [1, 0.5, 0]}]
  })");
}

std::string error_of(const json& doc) {
  try {
    scene_from_json(doc);
  } catch (const SceneFormatError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("scene save and load round trip") {
  Scene s = gen_scene(SceneKind::Random, GenParams{30, 1.0, 5, 64, 2});
  s.splats[3].freq_bound = 123.456789012345;
  const auto path = temp_path("roundtrip.json");
  save_scene(s, path);
  const Scene r = load_scene(path);
  REQUIRE(r.splats.size() == s.splats.size());
  REQUIRE(r.cameras.size() == s.cameras.size());
  CHECK(r.background == s.background);
  for (std::size_t i = 0; i < s.splats.size(); ++i) {
    const Splat& a = s.splats[i];
    const Splat& b = r.splats[i];
    CHECK(a.center == b.center);
    CHECK(a.rotation.coeffs() == b.rotation.coeffs());
    CHECK(a.color == b.color);
    CHECK(a.freq_bound == b.freq_bound);
    CHECK(within_ulps(a.scales().x(), b.scales().x(), 2));
    CHECK(within_ulps(a.scales().y(), b.scales().y(), 2));
    CHECK(within_ulps(a.opacity(), b.opacity(), 2));
  }
  for (std::size_t i = 0; i < s.cameras.size(); ++i) {
    CHECK(r.cameras[i].world_to_camera == s.cameras[i].world_to_camera);
    CHECK(r.cameras[i].fx == s.cameras[i].fx);
    CHECK(r.cameras[i].width == s.cameras[i].width);
  }
  std::filesystem::remove(path);
}

TEST_CASE("legacy splat without freq_bound loads with zero") {
  const Scene s = scene_from_json(minimal_doc());
  CHECK(s.splats[0].freq_bound == 0.0);
  CHECK(s.splats[0].scales().x() == doctest::Approx(0.5));
  CHECK(scene_to_json(s)["splats"][0].contains("freq_bound") == false);
}

TEST_CASE("schema errors name the field") {
  json d = minimal_doc();
  d["splats"][0].erase("scales");
  CHECK(error_of(d).find("$.splats[0].scales") != std::string::npos);
  CHECK(error_of(d).find("missing") != std::string::npos);

  d = minimal_doc();
  d["splats"][0]["opacity"] = 1.5;
  CHECK(error_of(d).find("$.splats[0].opacity") != std::string::npos);

  d = minimal_doc();
  d["splats"][0]["color"] = json::array({1, 2});
  CHECK(error_of(d).find("$.splats[0].color") != std::string::npos);

  d = minimal_doc();
  d["cameras"][0]["width"] = 2.5;
  CHECK(error_of(d).find("$.cameras[0].width") != std::string::npos);

  d = minimal_doc();
  d["extra"] = 1;
  CHECK(error_of(d).find("$.extra") != std::string::npos);

  d = minimal_doc();
  d["version"] = 2;
  CHECK(error_of(d).find("$.version") != std::string::npos);

  d = minimal_doc();
  d["splats"][0]["scales"][1] = -1.0;
  CHECK(error_of(d).find("$.splats[0].scales[1]") != std::string::npos);

  d = minimal_doc();
  d["splats"][0]["rotation"] = json::array({0, 0, 0, 0});
  CHECK(error_of(d).find("$.splats[0].rotation") != std::string::npos);
}

TEST_CASE("non-finite and malformed input") {
  const auto path = temp_path("bad.json");
  {
    std::ofstream out(path);
    out << R"({"version": 1, "background": [0, 0, NaN]})";
  }
  CHECK_THROWS_AS(load_scene(path), SceneFormatError);
  {
    std::ofstream out(path);
    out << "{ not json";
  }
  CHECK_THROWS_WITH_AS(load_scene(path), doctest::Contains("malformed JSON"), SceneFormatError);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_scene(temp_path("does_not_exist.json")), SceneFormatError);
  json d = minimal_doc();
  d["splats"][0]["center"][0] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(scene_from_json(d), SceneFormatError);
}

TEST_CASE("quaternion drift is renormalized with a warning") {
  json d = minimal_doc();
  d["splats"][0]["rotation"] = json::array({2.0, 0, 0, 0});
  std::vector<std::string> warnings;
  const Scene s = scene_from_json(d, &warnings);
  CHECK(s.splats[0].rotation.w() == 1.0);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("$.splats[0].rotation") != std::string::npos);

  d["splats"][0]["rotation"] = json::array({1.0 + 1e-9, 0, 0, 0});
  warnings.clear();
  const Scene t = scene_from_json(d, &warnings);
  CHECK(warnings.empty());
  CHECK(t.splats[0].rotation.norm() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("ppm encoding") {
  Image img(2, 1, 3);
  img.at(0, 0, 0) = 1.0;
  img.at(0, 0, 1) = 0.5;
  img.at(0, 0, 2) = -0.2;
  img.at(1, 0, 0) = 1.7;
  img.at(1, 0, 1) = 0.2;
  img.at(1, 0, 2) = 0.0;
  const std::string bytes = encode_ppm(img);
  const std::string header = "P6\n2 1\n255\n";
  REQUIRE(bytes.size() == header.size() + 6);
  CHECK(bytes.substr(0, header.size()) == header);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + header.size());
  CHECK(int(p[0]) == 255);
  CHECK(int(p[1]) == 128);
  CHECK(int(p[2]) == 0);
  CHECK(int(p[3]) == 255);
  CHECK(int(p[4]) == 51);
  CHECK(int(p[5]) == 0);
  const Image back = decode_ppm(bytes);
  CHECK(back.width == 2);
  CHECK(back.at(0, 0, 1) == doctest::Approx(128.0 / 255.0));
}

TEST_CASE("ppm file round trip and errors") {
  oracle::Rng rng(61);
  Image img(7, 5, 3);
  for (double& v : img.data) v = std::round(rng.uniform() * 255.0) / 255.0;
  const auto path = temp_path("img.ppm");
  write_ppm(img, path);
  const Image back = read_ppm(path);
  for (std::size_t i = 0; i < img.data.size(); ++i) CHECK(back.data[i] == doctest::Approx(img.data[i]).epsilon(1e-12));
  std::filesystem::remove(path);
  CHECK_THROWS_AS(decode_ppm("P3\n1 1\n255\n0 0 0"), ImageIoError);
  CHECK_THROWS_AS(decode_ppm("P6\n2 2\n255\nabc"), ImageIoError);
  CHECK_THROWS_AS(decode_ppm("P6\n1 1\n65535\n123456"), ImageIoError);
  CHECK_THROWS_AS(read_ppm(temp_path("missing.ppm")), ImageIoError);
  // Comments in the header are allowed.
  const Image c = decode_ppm(std::string("P6\n# made by hand\n1 1\n255\n") + std::string("\xff\x00\x80", 3));
  CHECK(c.at(0, 0, 0) == 1.0);
  CHECK(c.at(0, 0, 1) == 0.0);
}

TEST_CASE("single-channel images are written as gray") {
  Image g(1, 1, 1, 0.2);
  const std::string bytes = encode_ppm(g);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + bytes.size() - 3);
  CHECK(int(p[0]) == 51);
  CHECK(int(p[1]) == 51);
  CHECK(int(p[2]) == 51);
  CHECK_THROWS_AS(encode_ppm(Image(1, 1, 2)), ImageIoError);
}

TEST_CASE("display mappings stay in range") {
  Image depth(3, 1, 1), alpha(3, 1, 1), normal(1, 1, 3);
  depth.at(0, 0) = 2.0;
  depth.at(1, 0) = 4.0;
  alpha.at(0, 0) = 1.0;
  alpha.at(1, 0) = 1.0;
  const Image d = depth_to_display(depth, alpha);
  for (double v : d.data) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  CHECK(d.at(0, 0) != d.at(1, 0));
  normal.at(0, 0, 2) = -1.0;
  const Image n = normal_to_display(normal);
  CHECK(n.at(0, 0, 2) == doctest::Approx(0.0));
  CHECK(n.at(0, 0, 0) == doctest::Approx(0.5));
}

TEST_CASE("scene generators") {
  const Scene grid = gen_scene(SceneKind::Grid, GenParams{16, 1.0, 0, 128, 1});
  CHECK(grid.splats.size() == 256);
  CHECK(grid.cameras.size() == 1);
  const Scene grid3 = gen_scene(SceneKind::Grid, GenParams{4, 1.0, 0, 64, 3});
  CHECK(grid3.cameras.size() == 3);
  const Scene a = gen_scene(SceneKind::Random, GenParams{50, 1.0, 7, 128, 1});
  const Scene b = gen_scene(SceneKind::Random, GenParams{50, 1.0, 7, 128, 1});
  CHECK(a.splats.size() == 50);
  CHECK(scene_checksum(a) == scene_checksum(b));
  CHECK(scene_checksum(a) != scene_checksum(gen_scene(SceneKind::Random, GenParams{50, 1.0, 8, 128, 1})));
  const Scene sphere = gen_scene(SceneKind::CheckerSphere, GenParams{6, 1.0, 0, 64, 4});
  CHECK(sphere.splats.size() > 0);
  CHECK(sphere.cameras.size() == 4);
  for (const Camera& c : sphere.cameras) CHECK_NOTHROW(c.validate());
  CHECK(parse_scene_kind("checker-sphere") == SceneKind::CheckerSphere);
  CHECK_THROWS_AS(parse_scene_kind("cube"), InvalidArgument);
  CHECK_THROWS_AS(gen_scene(SceneKind::Grid, GenParams{0, 1.0, 0, 64, 1}), InvalidArgument);
}

TEST_CASE("random scene golden checksum") {
  const Scene s = gen_scene(SceneKind::Random, GenParams{50, 1.0, 7, 128, 1});
  CHECK(scene_checksum(s) == 13640232817061059654ull);
}
