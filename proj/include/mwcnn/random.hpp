#pragma once

#include "mwcnn/tensor.hpp"

#include <cstdint>
#include <random>

namespace mwcnn {

/// Seedable generator with platform-independent draws. The engine is
/// std::mt19937_64, whose output sequence is fixed by the standard; the
/// distributions are implemented here because the standard library ones are
/// not portable across implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_int(std::uint64_t n);

  /// Standard normal via the Box–Muller transform.
  double normal();

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Map of i.i.d. uniform values in [lo, hi).
FeatureMap random_map(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0);

/// Kernel with i.i.d. uniform weights in [lo, hi) and zero biases.
ConvKernel random_kernel(int out_c, int in_c, int kh, int kw, Rng& rng, double lo = -1.0, double hi = 1.0);

}  // namespace mwcnn
