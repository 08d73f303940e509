#include "doctest.h"
#include "oracles.hpp"

#include "splat2d/filters.hpp"

using namespace splat2d;

namespace {

Camera camera_at(const Vec3& eye, double f) {
  return Camera::look_at(eye, eye + Vec3::UnitZ(), -Vec3::UnitY(), f, 200, 200);
}

Splat splat_with(Vec2 scales, double opacity, double freq) {
  return Splat::from_physical(Vec3(0, 0, 2), Quat::Identity(), scales, opacity, Vec3::Ones(), freq);
}

}  // namespace

TEST_CASE("max_sampling_rate single camera") {
  const std::vector<Camera> cams{camera_at(Vec3::Zero(), 800)};
  CHECK(max_sampling_rate(Vec3(0, 0, 2), cams) == doctest::Approx(400.0));
}

TEST_CASE("max_sampling_rate takes the closest view") {
  const std::vector<Camera> cams{camera_at(Vec3(0, 0, -2), 800), camera_at(Vec3::Zero(), 800)};
  CHECK(max_sampling_rate(Vec3(0, 0, 2), cams) == doctest::Approx(400.0));
}

TEST_CASE("max_sampling_rate ignores cameras that do not see the point") {
  const std::vector<Camera> cams{camera_at(Vec3(0, 0, 5), 800)};
  CHECK(max_sampling_rate(Vec3(0, 0, 2), cams) == 0.0);
  // Outside the frustum expanded by 15 percent: image x = 800 * 1 / 2 + 100 = 500.
  const std::vector<Camera> side{camera_at(Vec3::Zero(), 800)};
  CHECK(max_sampling_rate(Vec3(1, 0, 2), side) == 0.0);
  // Just inside the expanded frustum: x = 800 * 0.14 / 2 + 100 = 156 < 230.
  CHECK(max_sampling_rate(Vec3(0.14, 0, 2), side) == doctest::Approx(400.0));
  // Between the viewport edge (200) and the margin (230).
  CHECK(max_sampling_rate(Vec3(0.31, 0, 2), side) == doctest::Approx(400.0));
  CHECK(max_sampling_rate(Vec3(0.34, 0, 2), side) == 0.0);
}

TEST_CASE("compute_freq_bounds fills every splat and requires cameras") {
  std::vector<Splat> splats{splat_with(Vec2(1, 1), 0.5, 0.0), splat_with(Vec2(1, 1), 0.5, 0.0)};
  splats[1].center = Vec3(0, 0, -1);
  const std::vector<Camera> cams{camera_at(Vec3::Zero(), 800)};
  compute_freq_bounds(splats, cams);
  CHECK(splats[0].freq_bound == doctest::Approx(400.0));
  CHECK(splats[1].freq_bound == 0.0);
  CHECK_THROWS_AS(compute_freq_bounds(splats, std::span<const Camera>{}), InvalidArgument);
}

TEST_CASE("flat_smooth symmetric case halves opacity") {
  // sigma_smooth^2 = s_reg / freq^2 = 0.2 / 0.2 = 1 = s^2.
  const Splat s = splat_with(Vec2(1, 1), 0.6, std::sqrt(0.2));
  const SmoothedSplat sm = flat_smooth(s, 0.2);
  CHECK(sm.sigma_smooth_sq == doctest::Approx(1.0));
  CHECK(sm.eff_opacity == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("flat_smooth direct arithmetic") {
  const Splat s = splat_with(Vec2(1, 2), 0.7, 1.0);
  const SmoothedSplat sm = flat_smooth(s, 0.2);
  CHECK(sm.eff_scales.x() == doctest::Approx(std::sqrt(1.2)).epsilon(1e-12));
  CHECK(sm.eff_scales.y() == doctest::Approx(std::sqrt(4.2)).epsilon(1e-12));
  CHECK(sm.eff_opacity == doctest::Approx(s.opacity() * 2.0 / (std::sqrt(1.2) * std::sqrt(4.2))).epsilon(1e-12));
  CHECK(sm.base == &s);
}

TEST_CASE("flat_smooth pass-through cases") {
  const Splat unseen = splat_with(Vec2(0.3, 0.4), 0.5, 0.0);
  const SmoothedSplat a = flat_smooth(unseen, 0.2);
  CHECK(a.eff_scales == unseen.scales());
  CHECK(a.eff_opacity == unseen.opacity());
  CHECK(a.sigma_smooth_sq == 0.0);
  const SmoothedSplat b = flat_smooth(splat_with(Vec2(0.3, 0.4), 0.5, 100.0), 0.0);
  CHECK(b.eff_scales == unseen.scales());
  const Splat far = splat_with(Vec2(0.3, 0.4), 0.5, 1e12);
  const SmoothedSplat c = flat_smooth(far, 0.2);
  CHECK((c.eff_scales - far.scales()).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(std::abs(c.eff_opacity - far.opacity()) < 1e-9);
}

TEST_CASE("flat_smooth invariants and frequency floor") {
  oracle::Rng rng(21);
  for (int i = 0; i < 10000; ++i) {
    const Splat s = splat_with(Vec2(std::exp(rng.uniform(-6, 2)), std::exp(rng.uniform(-6, 2))),
                               rng.uniform(0.01, 0.99), std::exp(rng.uniform(-2, 8)));
    const double sreg = rng.uniform(0.0, 1.0);
    const SmoothedSplat sm = flat_smooth(s, sreg);
    const Vec2 base = s.scales();
    CHECK((sm.eff_scales.array() >= base.array()).all());
    CHECK(sm.eff_opacity <= s.opacity());
    const double lhs = sm.eff_opacity * sm.eff_scales.x() * sm.eff_scales.y();
    const double rhs = s.opacity() * base.x() * base.y();
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, rhs));
    CHECK(sm.eff_scales.minCoeff() >= std::sqrt(sreg) / s.freq_bound * (1.0 - 1e-12));
  }
}

TEST_CASE("mip filter limits") {
  oracle::Rng rng(22);
  for (int i = 0; i < 100; ++i) {
    const Vec2 uv(rng.uniform(-3, 3), rng.uniform(-3, 3));
    const Mat2 j = oracle::random_jacobian(rng);
    CHECK(mip_filtered_gaussian(uv, j, 0.0) == doctest::Approx(gaussian_local(uv)).epsilon(1e-14));
  }
  CHECK(mip_filtered_gaussian(Vec2::Zero(), Mat2::Identity(), 0.1) == doctest::Approx(1.0 / 1.1).epsilon(1e-14));
  CHECK((mip_local_covariance(2.0 * Mat2::Identity(), 0.1) - 1.4 * Mat2::Identity()).norm() < 1e-15);
}

TEST_CASE("mip filter equals screen-space convolution by quadrature") {
  oracle::Rng rng(23);
  double worst = 0.0;
  for (int i = 0; i < 25; ++i) {
    const Vec2 uv(rng.uniform(-2, 2), rng.uniform(-2, 2));
    const Mat2 j = oracle::random_jacobian(rng);
    const double sigma = i % 5 == 0 ? rng.uniform(0.05, 1.0) : 0.1;
    const double expected = oracle::screen_convolution(uv, j, sigma);
    worst = std::max(worst, std::abs(mip_filtered_gaussian(uv, j, sigma) - expected) / expected);
  }
  CHECK(worst < 1e-3);
}

TEST_CASE("clamped gaussian cases") {
  const double cs = 0.7071;
  CHECK(clamped_gaussian(Vec2(5, 5), Vec2(10, 10), Vec2(10, 10), cs) == doctest::Approx(1.0));
  CHECK(clamped_gaussian(Vec2(0, 0), Vec2(40, 10), Vec2(10, 10), cs) == doctest::Approx(1.0));
  const double tie = clamped_gaussian(Vec2(2, 0), Vec2(10 + 2 * cs, 10), Vec2(10, 10), cs);
  CHECK(tie == doctest::Approx(std::exp(-2.0)).epsilon(1e-12));
  oracle::Rng rng(24);
  for (int i = 0; i < 1000; ++i) {
    const Vec2 uv(rng.uniform(-4, 4), rng.uniform(-4, 4));
    const Vec2 px(rng.uniform(0, 20), rng.uniform(0, 20));
    CHECK(clamped_gaussian(uv, px, Vec2(10, 10), cs) >= gaussian_local(uv));
  }
}
