#pragma once

#include "mwcnn/autograd.hpp"

#include <functional>
#include <string>
#include <vector>

namespace mwcnn {

/// Builds a scalar loss on `tape` from leaf variables created for each input.
using LossBuilder = std::function<Var(GradTape& tape, const std::vector<Var>& inputs)>;

struct GradCheckResult {
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::size_t entries = 0;
  std::string worst;  // location of the largest relative error
};

/// Compares tape adjoints with central finite differences for every entry of
/// every input and every kernel weight/bias. Relative error is
/// |analytic − numeric| / max(|analytic|, |numeric|, floor).
/// Inputs and kernels are perturbed in place and restored afterwards.
GradCheckResult check_gradients(const LossBuilder& build, std::vector<FeatureMap>& inputs,
                                const std::vector<ConvKernel*>& kernels, double step = 1e-5,
                                double floor = 1e-6);

}  // namespace mwcnn
