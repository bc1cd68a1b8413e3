#include "mwcnn/optimizer.hpp"

#include <cmath>
#include <string>

namespace mwcnn {
namespace {

bool same_layout(const ConvKernel& a, const ConvKernel& b) {
  return a.weights.size() == b.weights.size() && a.bias.size() == b.bias.size();
}

void update(AlignedVector& p, const AlignedVector& g, AlignedVector& m,
            AlignedVector& v, double lr, double c1, double c2, const AdamHyper& h) {
  for (std::size_t i = 0; i < p.size(); ++i) {
    m[i] = h.beta1 * m[i] + (1.0 - h.beta1) * g[i];
    v[i] = h.beta2 * v[i] + (1.0 - h.beta2) * g[i] * g[i];
    const double m_hat = m[i] / c1;
    const double v_hat = v[i] / c2;
    p[i] -= lr * m_hat / (std::sqrt(v_hat) + h.epsilon);
  }
}

}  // namespace

AdamState AdamState::like(const std::vector<ConvKernel>& params) {
  AdamState s;
  for (const auto& k : params) {
    s.m.emplace_back(k.out_channels, k.in_channels, k.kh, k.kw);
    s.v.emplace_back(k.out_channels, k.in_channels, k.kh, k.kw);
  }
  return s;
}

void adam_step(std::vector<ConvKernel>& params, const std::vector<ConvKernel>& grads,
               AdamState& state, double lr, const AdamHyper& hyper) {
  if (grads.size() != params.size() || state.m.size() != params.size() ||
      state.v.size() != params.size()) {
    throw ShapeError("adam_step: parameter, gradient and moment counts differ");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!same_layout(params[i], grads[i]) || !same_layout(params[i], state.m[i]) ||
        !same_layout(params[i], state.v[i])) {
      throw ShapeError("adam_step: shape mismatch at parameter " + std::to_string(i));
    }
    for (const auto* values : {&grads[i].weights, &grads[i].bias}) {
      for (double g : *values) {
        if (!std::isfinite(g)) {
          throw NonFiniteGradient("adam_step: non-finite gradient in parameter " +
                                  std::to_string(i) + " at step " + std::to_string(state.t + 1));
        }
      }
    }
  }
  ++state.t;
  const double c1 = 1.0 - std::pow(hyper.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(hyper.beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    update(params[i].weights, grads[i].weights, state.m[i].weights, state.v[i].weights, lr, c1, c2, hyper);
    update(params[i].bias, grads[i].bias, state.m[i].bias, state.v[i].bias, lr, c1, c2, hyper);
  }
}

}  // namespace mwcnn
