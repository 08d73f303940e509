#include "splat2d/metrics.hpp"

#include <array>
#include <cmath>
#include <string>

namespace splat2d {

namespace {

void check_same(const Image& a, const Image& b) {
  if (!a.same_shape(b))
    throw InvalidArgument("image dimensions differ: " + std::to_string(a.width) + "x" +
                          std::to_string(a.height) + "x" + std::to_string(a.channels) + " vs " +
                          std::to_string(b.width) + "x" + std::to_string(b.height) + "x" +
                          std::to_string(b.channels));
  if (a.data.empty()) throw InvalidArgument("images are empty");
}

using Window = std::array<double, kSsimWindow>;

const Window& gaussian_window() {
  static const Window w = [] {
    Window g{};
    double sum = 0.0;
    for (int i = 0; i < kSsimWindow; ++i) {
      const double d = i - kSsimWindow / 2;
      g[i] = std::exp(-d * d / (2.0 * kSsimSigma * kSsimSigma));
      sum += g[i];
    }
    for (double& v : g) v /= sum;
    return g;
  }();
  return w;
}

// Dense single-channel plane.
struct Plane {
  int w = 0;
  int h = 0;
  std::vector<double> v;
  Plane(int width, int height) : w(width), h(height), v(std::size_t(width) * height, 0.0) {}
  double& operator()(int x, int y) { return v[std::size_t(y) * w + x]; }
  double operator()(int x, int y) const { return v[std::size_t(y) * w + x]; }
};

Plane grayscale(const Image& img) {
  Plane p(img.width, img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      double s = 0.0;
      for (int c = 0; c < img.channels; ++c) s += img.at(x, y, c);
      p(x, y) = s / img.channels;
    }
  return p;
}

// Separable correlation keeping only positions where the window fits.
Plane filter_valid(const Plane& in) {
  const Window& g = gaussian_window();
  const int k = kSsimWindow;
  Plane rows(in.w - k + 1, in.h);
  for (int y = 0; y < in.h; ++y)
    for (int x = 0; x < rows.w; ++x) {
      double s = 0.0;
      for (int i = 0; i < k; ++i) s += g[i] * in(x + i, y);
      rows(x, y) = s;
    }
  Plane out(rows.w, in.h - k + 1);
  for (int y = 0; y < out.h; ++y)
    for (int x = 0; x < out.w; ++x) {
      double s = 0.0;
      for (int i = 0; i < k; ++i) s += g[i] * rows(x, y + i);
      out(x, y) = s;
    }
  return out;
}

// Adjoint of filter_valid: spreads a valid-size map back to full size.
Plane filter_adjoint(const Plane& in, int full_w, int full_h) {
  const Window& g = gaussian_window();
  const int k = kSsimWindow;
  Plane cols(in.w, full_h);
  for (int y = 0; y < in.h; ++y)
    for (int x = 0; x < in.w; ++x)
      for (int i = 0; i < k; ++i) cols(x, y + i) += g[i] * in(x, y);
  Plane out(full_w, full_h);
  for (int y = 0; y < full_h; ++y)
    for (int x = 0; x < in.w; ++x)
      for (int i = 0; i < k; ++i) out(x + i, y) += g[i] * cols(x, y);
  return out;
}

Plane product(const Plane& a, const Plane& b) {
  Plane p(a.w, a.h);
  for (std::size_t i = 0; i < p.v.size(); ++i) p.v[i] = a.v[i] * b.v[i];
  return p;
}

double ssim_impl(const Image& a, const Image& b, Image* grad_a) {
  check_same(a, b);
  if (a.width < kSsimWindow || a.height < kSsimWindow)
    throw InvalidArgument("images are smaller than the 11x11 SSIM window");
  const Plane x = grayscale(a);
  const Plane y = grayscale(b);
  const Plane mu_x = filter_valid(x);
  const Plane mu_y = filter_valid(y);
  const Plane e_xx = filter_valid(product(x, x));
  const Plane e_yy = filter_valid(product(y, y));
  const Plane e_xy = filter_valid(product(x, y));

  const std::size_t n = mu_x.v.size();
  Plane d_mu(mu_x.w, mu_x.h), d_xx(mu_x.w, mu_x.h), d_xy(mu_x.w, mu_x.h);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double mx = mu_x.v[i];
    const double my = mu_y.v[i];
    const double vx = e_xx.v[i] - mx * mx;
    const double vy = e_yy.v[i] - my * my;
    const double cxy = e_xy.v[i] - mx * my;
    const double a1 = 2.0 * mx * my + kSsimC1;
    const double a2 = 2.0 * cxy + kSsimC2;
    const double b1 = mx * mx + my * my + kSsimC1;
    const double b2 = vx + vy + kSsimC2;
    const double s = (a1 * a2) / (b1 * b2);
    total += s;
    if (grad_a != nullptr) {
      // Partials w.r.t. the window moments mu_x, E[x^2], E[xy] of `a`.
      // Factored so the gradient vanishes exactly when a == b.
      d_mu.v[i] = 2.0 * (my * (a2 - a1) - mx * s * (b2 - b1)) / (b1 * b2);
      const double t = a1 / (b1 * b2);
      d_xx.v[i] = -t * (a2 / b2);
      d_xy.v[i] = 2.0 * t;
    }
  }
  const double mean = total / double(n);
  if (grad_a != nullptr) {
    const double inv_n = 1.0 / double(n);
    const Plane g_mu = filter_adjoint(d_mu, x.w, x.h);
    const Plane g_xx = filter_adjoint(d_xx, x.w, x.h);
    const Plane g_xy = filter_adjoint(d_xy, x.w, x.h);
    *grad_a = Image(a.width, a.height, a.channels);
    for (int py = 0; py < a.height; ++py)
      for (int px = 0; px < a.width; ++px) {
        const double g = inv_n * (g_mu(px, py) + 2.0 * x(px, py) * g_xx(px, py) +
                                  y(px, py) * g_xy(px, py));
        for (int c = 0; c < a.channels; ++c) grad_a->at(px, py, c) = g / a.channels;
      }
  }
  return mean;
}

}  // namespace

double mse(const Image& a, const Image& b) {
  check_same(a, b);
  double sum = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const double d = a.data[i] - b.data[i];
    sum += d * d;
  }
  return sum / double(a.data.size());
}

double psnr(const Image& a, const Image& b) {
  const double e = mse(a, b);
  if (e < 1e-10) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(1.0 / e));
}

double ssim(const Image& a, const Image& b) { return ssim_impl(a, b, nullptr); }

double ssim_with_gradient(const Image& a, const Image& b, Image& grad_a) {
  return ssim_impl(a, b, &grad_a);
}

MetricReport compare(const Image& a, const Image& b) {
  MetricReport r;
  r.mse = mse(a, b);
  r.psnr = psnr(a, b);
  r.ssim = ssim(a, b);
  return r;
}

}  // namespace splat2d
