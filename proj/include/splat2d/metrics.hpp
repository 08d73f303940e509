#pragma once

#include "splat2d/core.hpp"

namespace splat2d {

struct MetricReport {
  double psnr = 0.0;
  double ssim = 0.0;
  double mse = 0.0;
};

inline constexpr double kPsnrCap = 100.0;
inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;
inline constexpr double kSsimC1 = 0.01 * 0.01;
inline constexpr double kSsimC2 = 0.03 * 0.03;

/// Mean squared error over all pixels and channels.
double mse(const Image& a, const Image& b);

/// 10 log10(1 / mse) for images in [0, 1], capped at 100 dB.
double psnr(const Image& a, const Image& b);

/// Mean SSIM of the channel-mean grayscale images over all positions where
/// the 11x11 Gaussian window (sigma 1.5) fits entirely.
double ssim(const Image& a, const Image& b);

/// SSIM and its gradient with respect to every sample of `a`.
double ssim_with_gradient(const Image& a, const Image& b, Image& grad_a);

MetricReport compare(const Image& a, const Image& b);

}  // namespace splat2d
