#include "doctest.h"
#include "oracles.hpp"

#include "splat2d/metrics.hpp"

using namespace splat2d;

namespace {

Image constant(int w, int h, double v) { return Image(w, h, 3, v); }

Image noise(oracle::Rng& rng, int w, int h) {
  Image img(w, h, 3);
  for (double& v : img.data) v = rng.uniform();
  return img;
}

}  // namespace

TEST_CASE("psnr reference values") {
  CHECK(psnr(constant(16, 16, 0.3), constant(16, 16, 0.3)) == kPsnrCap);
  CHECK(psnr(constant(16, 16, 0.0), constant(16, 16, 1.0)) == doctest::Approx(0.0));
  CHECK(psnr(constant(16, 16, 0.5), constant(16, 16, 0.6)) == doctest::Approx(20.0).epsilon(1e-9));
  CHECK(mse(constant(4, 4, 0.5), constant(4, 4, 0.6)) == doctest::Approx(0.01));
  CHECK_THROWS_AS(mse(constant(4, 4, 0.5), constant(4, 5, 0.5)), InvalidArgument);
}

TEST_CASE("ssim of identical images is one") {
  oracle::Rng rng(41);
  const Image a = noise(rng, 32, 24);
  CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("ssim of constant images has a closed form") {
  // Zero variance: SSIM = (2 mu_x mu_y + C1) / (mu_x^2 + mu_y^2 + C1) per window.
  const double x = 0.5, y = 0.6;
  const double expected = (2 * x * y + kSsimC1) / (x * x + y * y + kSsimC1);
  CHECK(ssim(constant(20, 20, x), constant(20, 20, y)) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(expected == doctest::Approx(0.6001 / 0.6101).epsilon(1e-12));
}

TEST_CASE("ssim of an image against its negative is negative") {
  oracle::Rng rng(42);
  Image a = noise(rng, 24, 24);
  Image b = a;
  for (double& v : b.data) v = 1.0 - v;
  CHECK(ssim(a, b) < 0.0);
}

TEST_CASE("ssim with a known window oracle") {
  // A direct, unoptimized evaluation of the windowed SSIM on the gray image.
  oracle::Rng rng(43);
  const Image a = noise(rng, 14, 13);
  const Image b = noise(rng, 14, 13);
  double w[11];
  double wsum = 0;
  for (int i = 0; i < 11; ++i) wsum += (w[i] = std::exp(-(i - 5) * (i - 5) / (2 * 1.5 * 1.5)));
  auto gray = [](const Image& img, int x, int y) {
    return (img.at(x, y, 0) + img.at(x, y, 1) + img.at(x, y, 2)) / 3.0;
  };
  double total = 0;
  int count = 0;
  for (int oy = 0; oy + 11 <= 13; ++oy)
    for (int ox = 0; ox + 11 <= 14; ++ox) {
      double mx = 0, my = 0, xx = 0, yy = 0, xy = 0;
      for (int j = 0; j < 11; ++j)
        for (int i = 0; i < 11; ++i) {
          const double k = w[i] * w[j] / (wsum * wsum);
          const double gx = gray(a, ox + i, oy + j), gy = gray(b, ox + i, oy + j);
          mx += k * gx;
          my += k * gy;
          xx += k * gx * gx;
          yy += k * gy * gy;
          xy += k * gx * gy;
        }
      const double vx = xx - mx * mx, vy = yy - my * my, cxy = xy - mx * my;
      total += (2 * mx * my + kSsimC1) * (2 * cxy + kSsimC2) / ((mx * mx + my * my + kSsimC1) * (vx + vy + kSsimC2));
      ++count;
    }
  CHECK(ssim(a, b) == doctest::Approx(total / count).epsilon(1e-12));
}

TEST_CASE("ssim rejects images smaller than the window") {
  CHECK_THROWS_AS(ssim(constant(10, 20, 0.1), constant(10, 20, 0.1)), InvalidArgument);
}

TEST_CASE("ssim gradient matches finite differences") {
  oracle::Rng rng(44);
  const Image a = noise(rng, 16, 14);
  const Image b = noise(rng, 16, 14);
  Image grad;
  const double value = ssim_with_gradient(a, b, grad);
  CHECK(value == doctest::Approx(ssim(a, b)).epsilon(1e-14));
  REQUIRE(grad.same_shape(a));
  double worst = 0.0;
  for (int k = 0; k < 60; ++k) {
    const std::size_t i = std::size_t(rng.index(int(a.data.size())));
    Image p = a, m = a;
    const double h = 1e-4;
    p.data[i] += h;
    m.data[i] -= h;
    const double fd = (ssim(p, b) - ssim(m, b)) / (2 * h);
    worst = std::max(worst, std::abs(fd - grad.data[i]) / std::max(std::abs(fd), 1e-6));
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("ssim gradient vanishes exactly at equality") {
  oracle::Rng rng(45);
  const Image a = noise(rng, 20, 20);
  Image grad;
  ssim_with_gradient(a, a, grad);
  for (double g : grad.data) CHECK(g == 0.0);
}

TEST_CASE("compare bundles all three metrics") {
  const MetricReport r = compare(constant(12, 12, 0.5), constant(12, 12, 0.6));
  CHECK(r.mse == doctest::Approx(0.01));
  CHECK(r.psnr == doctest::Approx(20.0));
  CHECK(r.ssim < 1.0);
}
