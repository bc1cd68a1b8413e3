#include "mwcnn/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace mwcnn {
namespace {

double evaluate(const LossBuilder& build, const std::vector<FeatureMap>& inputs) {
  GradTape tape;
  std::vector<Var> vars;
  vars.reserve(inputs.size());
  for (const auto& x : inputs) vars.push_back(tape.input(x));
  return tape.value(build(tape, vars)).data()[0];
}

}  // namespace

GradCheckResult check_gradients(const LossBuilder& build, std::vector<FeatureMap>& inputs,
                                const std::vector<ConvKernel*>& kernels, double step, double floor) {
  GradTape tape;
  std::vector<Var> vars;
  for (const auto& x : inputs) vars.push_back(tape.input(x));
  const Var loss = build(tape, vars);
  const Gradients grads = backward(tape, loss);

  GradCheckResult result;
  auto compare = [&](double analytic, double& slot, const std::string& where) {
    const double saved = slot;
    slot = saved + step;
    const double up = evaluate(build, inputs);
    slot = saved - step;
    const double down = evaluate(build, inputs);
    slot = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double abs_err = std::abs(analytic - numeric);
    const double rel = abs_err / std::max({std::abs(analytic), std::abs(numeric), floor});
    result.max_abs_error = std::max(result.max_abs_error, abs_err);
    if (rel > result.max_rel_error || result.entries == 0) {
      result.max_rel_error = std::max(result.max_rel_error, rel);
      result.worst = where;
    }
    ++result.entries;
  };

  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const FeatureMap g = grads.input(vars[i]);
    auto values = inputs[i].data();
    for (std::size_t j = 0; j < values.size(); ++j) {
      compare(g.data()[j], values[j], "input " + std::to_string(i) + "[" + std::to_string(j) + "]");
    }
  }
  for (std::size_t p = 0; p < kernels.size(); ++p) {
    ConvKernel& k = *kernels[p];
    const ConvKernel zero(k.out_channels, k.in_channels, k.kh, k.kw);
    const ConvKernel& g = grads.has_kernel(k) ? grads.kernel(k) : zero;
    for (std::size_t j = 0; j < k.weights.size(); ++j) {
      compare(g.weights[j], k.weights[j], "kernel " + std::to_string(p) + ".w[" + std::to_string(j) + "]");
    }
    for (std::size_t j = 0; j < k.bias.size(); ++j) {
      compare(g.bias[j], k.bias[j], "kernel " + std::to_string(p) + ".b[" + std::to_string(j) + "]");
    }
  }
  return result;
}

}  // namespace mwcnn
