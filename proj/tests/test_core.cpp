#include "doctest.h"
#include "oracles.hpp"

#include "splat2d/core.hpp"

using namespace splat2d;

TEST_CASE("object_to_world identity splat") {
  const Splat s = Splat::from_physical(Vec3::Zero(), Quat::Identity(), Vec2(1, 1), 0.5, Vec3::Zero());
  Mat4 expected = Mat4::Identity();
  expected(2, 2) = 0.0;
  CHECK((object_to_world(s) - expected).norm() < 1e-15);
}

TEST_CASE("object_to_world maps the local origin to the center") {
  oracle::Rng rng(1);
  const Splat s = Splat::from_physical(Vec3(1, -2, 3), rng.rotation(), Vec2(0.3, 0.7), 0.4, Vec3::Ones());
  const Vec4 p = object_to_world(s) * Vec4(0, 0, 1, 1);
  CHECK((p - Vec4(1, -2, 3, 1)).norm() < 1e-15);
}

TEST_CASE("object_to_world columns agree with the explicit plane") {
  oracle::Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    const Splat s = Splat::from_physical(Vec3(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)),
                                         rng.rotation(), Vec2(rng.uniform(0.01, 3), rng.uniform(0.01, 3)),
                                         rng.uniform(0.01, 0.99), Vec3::Zero());
    const Mat4 h = object_to_world(s);
    const Vec4 col = h * Vec4(1, 0, 1, 1) - Vec4(s.center.x(), s.center.y(), s.center.z(), 1.0);
    const Vec3 su_tu = s.scales().x() * s.tangent_u();
    CHECK((col.head<3>() - su_tu).norm() < 1e-12);
    CHECK(col[3] == 0.0);
    for (int k = 0; k < 5; ++k) {
      const Vec2 uv(rng.uniform(-3, 3), rng.uniform(-3, 3));
      const Vec4 p = h * Vec4(uv.x(), uv.y(), 1, 1);
      CHECK((p.head<3>() - oracle::plane_point(s, uv)).norm() < 1e-12);
      CHECK(p[3] == 1.0);
    }
    CHECK(h.row(3) == Eigen::RowVector4d(0, 0, 0, 1));
  }
}

TEST_CASE("object_to_world is affine along lines") {
  oracle::Rng rng(3);
  const Splat s = Splat::from_physical(Vec3(0.2, 0.1, 4), rng.rotation(), Vec2(0.5, 2.0), 0.5, Vec3::Zero());
  const Mat4 h = object_to_world(s);
  const Vec2 dir(0.3, -1.1);
  const Vec3 a = (h * Vec4(0, 0, 1, 1)).head<3>();
  const Vec3 b = (h * Vec4(dir.x(), dir.y(), 1, 1)).head<3>();
  const Vec3 c = (h * Vec4(2.5 * dir.x(), 2.5 * dir.y(), 1, 1)).head<3>();
  CHECK((b - a).cross(c - a).norm() < 1e-9);
  CHECK(((c - a) - 2.5 * (b - a)).norm() < 1e-9);
}

TEST_CASE("gaussian_local values") {
  CHECK(gaussian_local(Vec2(0, 0)) == 1.0);
  CHECK(gaussian_local(Vec2(1, 0)) == doctest::Approx(0.60653065971).epsilon(1e-10));
  CHECK(gaussian_local(Vec2(3, 4)) == doctest::Approx(std::exp(-12.5)).epsilon(1e-14));
  CHECK(gaussian_local(Vec2(1e-9, 0)) <= 1.0);
}

TEST_CASE("gaussian_local is rotationally symmetric") {
  oracle::Rng rng(4);
  for (int i = 0; i < 1000; ++i) {
    const Vec2 u(rng.uniform(-4, 4), rng.uniform(-4, 4));
    const Mat2 r = Eigen::Rotation2Dd(rng.uniform(0, 2 * M_PI)).toRotationMatrix();
    CHECK(std::abs(gaussian_local(r * u) - gaussian_local(u)) < 1e-12);
  }
}

TEST_CASE("splat parameterization round trip") {
  oracle::Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    const Quat q = rng.rotation();
    const Vec2 s(rng.uniform(1e-3, 10), rng.uniform(1e-3, 10));
    const double a = rng.uniform(0.001, 0.999);
    const Vec3 c(rng.uniform(), rng.uniform(), rng.uniform());
    const Splat sp = Splat::from_physical(Vec3(1, 2, 3), q, s, a, c, 12.5);
    CHECK((sp.scales() - s).norm() < 1e-9);
    CHECK(std::abs(sp.opacity() - a) < 1e-9);
    CHECK((sp.frame() - q.toRotationMatrix()).norm() < 1e-9);
    CHECK(sp.color == c);
    CHECK(sp.freq_bound == 12.5);
    CHECK(std::abs(sp.normal().dot(sp.tangent_u())) < 1e-12);
  }
}

TEST_CASE("splat construction rejects invalid physical values") {
  CHECK_THROWS_AS(Splat::from_physical(Vec3::Zero(), Quat::Identity(), Vec2(0, 1), 0.5, Vec3::Zero()),
                  InvalidArgument);
  CHECK_THROWS_AS(Splat::from_physical(Vec3::Zero(), Quat::Identity(), Vec2(1, 1), 1.0, Vec3::Zero()),
                  InvalidArgument);
  CHECK_THROWS_AS(Splat::from_physical(Vec3::Zero(), Quat::Identity(), Vec2(1, 1), 0.0, Vec3::Zero()),
                  InvalidArgument);
}

TEST_CASE("camera validation") {
  Camera c;
  c.fx = c.fy = 100;
  c.width = c.height = 10;
  CHECK_NOTHROW(c.validate());
  Camera bad = c;
  bad.fx = 0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = c;
  bad.width = 0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = c;
  bad.world_to_camera(0, 0) = 2.0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = c;
  bad.world_to_camera(3, 0) = 1.0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = c;
  bad.world_to_camera(1, 3) = std::nan("");
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("look_at puts the target on the optical axis") {
  const Vec3 eye(1, 2, -3);
  const Vec3 target(0.5, -0.2, 1.0);
  const Camera c = Camera::look_at(eye, target, Vec3(0, -1, 0), 100, 64, 48);
  CHECK_NOTHROW(c.validate());
  CHECK((c.position() - eye).norm() < 1e-12);
  const Vec3 t = c.to_camera(target);
  CHECK(std::abs(t.x()) < 1e-12);
  CHECK(std::abs(t.y()) < 1e-12);
  CHECK(t.z() == doctest::Approx((target - eye).norm()));
  CHECK(c.cx == 32.0);
  CHECK(c.cy == 24.0);
}

TEST_CASE("camera scaling multiplies intrinsics and resolution") {
  const Camera c = Camera::look_at(Vec3::Zero(), Vec3::UnitZ(), -Vec3::UnitY(), 100, 64, 32);
  const Camera s = c.scaled(4);
  CHECK(s.fx == 400);
  CHECK(s.cx == 128);
  CHECK(s.width == 256);
  CHECK(s.height == 128);
  const Camera d = c.scaled(0.25);
  CHECK(d.width == 16);
  CHECK(d.height == 8);
  CHECK(d.cy == 4);
  CHECK(d.world_to_camera == c.world_to_camera);
}

TEST_CASE("render config defaults and validation") {
  const RenderConfig c;
  CHECK(c.mip_sigma == 0.1);
  CHECK(c.smooth_sreg == 0.2);
  CHECK(c.clamp_sigma == doctest::Approx(std::sqrt(0.5)).epsilon(1e-4));
  CHECK(c.tile_size == 16);
  CHECK(c.alpha_cutoff == 1.0 / 255.0);
  CHECK(c.transmittance_floor == 1e-4);
  CHECK(c.near_plane == 0.2);
  CHECK(c.bbox_nsigma == 3.0);
  CHECK_NOTHROW(c.validate());
  RenderConfig bad = c;
  bad.tile_size = 12;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = c;
  bad.clamp_sigma = 0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = c;
  bad.mip_sigma = -1;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = c;
  bad.alpha_cutoff = 0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("filter mode names") {
  CHECK(parse_filter_mode("none") == FilterMode::None);
  CHECK(parse_filter_mode("clamp") == FilterMode::Clamp);
  CHECK(parse_filter_mode("aa") == FilterMode::AA);
  CHECK(std::string(to_string(FilterMode::AA)) == "aa");
  CHECK_THROWS_AS(parse_filter_mode("mip"), InvalidArgument);
}
