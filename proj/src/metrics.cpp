#include "mwcnn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mwcnn {
namespace {

// Valid-region separable filtering of one plane.
std::vector<double> filter_valid(std::span<const double> src, int h, int w, const std::vector<double>& k) {
  const int n = static_cast<int>(k.size());
  const int oh = h - n + 1;
  const int ow = w - n + 1;
  std::vector<double> tmp(static_cast<std::size_t>(h) * ow);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int t = 0; t < n; ++t) acc += k[t] * src[static_cast<std::size_t>(y) * w + x + t];
      tmp[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  std::vector<double> out(static_cast<std::size_t>(oh) * ow);
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int t = 0; t < n; ++t) acc += k[t] * tmp[static_cast<std::size_t>(y + t) * ow + x];
      out[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  return out;
}

}  // namespace

double mse(const FeatureMap& a, const FeatureMap& b) {
  if (a.shape() != b.shape()) throw ShapeError("mse: shape mismatch " + a.shape().str() + " vs " + b.shape().str());
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a.data()[i] - b.data()[i];
    acc += d * d;
  }
  return acc / static_cast<double>(a.size());
}

double psnr(const FeatureMap& a, const FeatureMap& b, double peak) {
  const double e = mse(a, b);
  if (e == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / e);
}

std::vector<double> ssim_window(const SsimParams& p) {
  std::vector<double> k(static_cast<std::size_t>(p.window));
  const double c = (p.window - 1) / 2.0;
  double total = 0.0;
  for (int i = 0; i < p.window; ++i) {
    k[i] = std::exp(-((i - c) * (i - c)) / (2.0 * p.sigma * p.sigma));
    total += k[i];
  }
  for (double& v : k) v /= total;
  return k;
}

double ssim(const FeatureMap& a, const FeatureMap& b, const SsimParams& p) {
  if (a.shape() != b.shape()) throw ShapeError("ssim: shape mismatch");
  if (a.height() < p.window || a.width() < p.window) {
    throw ShapeError("ssim: image " + a.shape().str() + " smaller than the " + std::to_string(p.window) +
                     "x" + std::to_string(p.window) + " window");
  }
  const auto k = ssim_window(p);
  const double c1 = (p.k1 * p.peak) * (p.k1 * p.peak);
  const double c2 = (p.k2 * p.peak) * (p.k2 * p.peak);
  const int h = a.height();
  const int w = a.width();
  double total = 0.0;
  std::size_t count = 0;
  std::vector<double> aa(a.shape().plane()), bb(aa.size()), ab(aa.size());
  for (int n = 0; n < a.batch(); ++n) {
    for (int c = 0; c < a.channels(); ++c) {
      const auto pa = a.plane(n, c);
      const auto pb = b.plane(n, c);
      for (std::size_t i = 0; i < aa.size(); ++i) {
        aa[i] = pa[i] * pa[i];
        bb[i] = pb[i] * pb[i];
        ab[i] = pa[i] * pb[i];
      }
      const auto mu_a = filter_valid(pa, h, w, k);
      const auto mu_b = filter_valid(pb, h, w, k);
      const auto e_aa = filter_valid(aa, h, w, k);
      const auto e_bb = filter_valid(bb, h, w, k);
      const auto e_ab = filter_valid(ab, h, w, k);
      for (std::size_t i = 0; i < mu_a.size(); ++i) {
        const double va = e_aa[i] - mu_a[i] * mu_a[i];
        const double vb = e_bb[i] - mu_b[i] * mu_b[i];
        const double cov = e_ab[i] - mu_a[i] * mu_b[i];
        total += ((2.0 * mu_a[i] * mu_b[i] + c1) * (2.0 * cov + c2)) /
                 ((mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + c1) * (va + vb + c2));
      }
      count += mu_a.size();
    }
  }
  return total / static_cast<double>(count);
}

FeatureMap clip_intensity(const FeatureMap& x) {
  FeatureMap out(x.shape());
  std::transform(x.data().begin(), x.data().end(), out.data().begin(),
                 [](double v) { return std::clamp(v, 0.0, 255.0); });
  return out;
}

}  // namespace mwcnn
