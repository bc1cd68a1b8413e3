#pragma once

#include "mwcnn/tensor.hpp"

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace mwcnn {

struct AdamHyper {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// First/second moments shaped like the parameters they track.
struct AdamState {
  std::vector<ConvKernel> m;
  std::vector<ConvKernel> v;
  std::uint64_t t = 0;

  static AdamState like(const std::vector<ConvKernel>& params);
};

class NonFiniteGradient : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One bias-corrected Adam update of every kernel (weights and biases).
/// Throws NonFiniteGradient before touching any parameter if a gradient entry
/// is NaN or infinite.
void adam_step(std::vector<ConvKernel>& params, const std::vector<ConvKernel>& grads,
               AdamState& state, double lr, const AdamHyper& hyper = {});

}  // namespace mwcnn
