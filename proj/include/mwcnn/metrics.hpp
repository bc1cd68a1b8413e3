#pragma once

#include "mwcnn/tensor.hpp"

#include <array>

namespace mwcnn {

/// 10·log10(peak² / MSE). Identical inputs give +infinity.
double psnr(const FeatureMap& a, const FeatureMap& b, double peak = 255.0);

double mse(const FeatureMap& a, const FeatureMap& b);

struct SsimParams {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double peak = 255.0;
};

/// Normalized 1D Gaussian taps of the SSIM window.
std::vector<double> ssim_window(const SsimParams& p = {});

/// Mean single-scale SSIM over all fully-contained windows of every plane.
double ssim(const FeatureMap& a, const FeatureMap& b, const SsimParams& p = {});

/// Clamps to [0, 255] without rounding.
FeatureMap clip_intensity(const FeatureMap& x);

}  // namespace mwcnn
