#include "mwcnn/random.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace mwcnn {

std::uint64_t Rng::uniform_int(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("Rng::uniform_int: empty range");
  // Rejection keeps the draw unbiased.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t v;
  do {
    v = engine_();
  } while (v >= limit);
  return v % n;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

FeatureMap random_map(Shape shape, Rng& rng, double lo, double hi) {
  FeatureMap x(shape);
  for (double& v : x.data()) v = lo + (hi - lo) * rng.uniform();
  return x;
}

ConvKernel random_kernel(int out_c, int in_c, int kh, int kw, Rng& rng, double lo, double hi) {
  ConvKernel k(out_c, in_c, kh, kw);
  for (double& v : k.weights) v = lo + (hi - lo) * rng.uniform();
  return k;
}

}  // namespace mwcnn
