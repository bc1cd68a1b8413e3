#include "mwcnn/autograd.hpp"

#include <stdexcept>

namespace mwcnn {

class TapeSink final : public AdjointSink {
 public:
  explicit TapeSink(Gradients& grads) : grads_(grads) {}

  void accumulate(Var input, const FeatureMap& adjoint) override {
    auto& slot = grads_.values_.at(input.id);
    if (!slot) {
      slot = adjoint;
      return;
    }
    if (slot->shape() != adjoint.shape()) {
      throw ShapeError("backward: adjoint shape " + adjoint.shape().str() +
                       " does not match value " + slot->shape().str());
    }
    auto dst = slot->data();
    const auto src = adjoint.data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  }

  ConvKernel& kernel_grad(const ConvKernel& kernel) override {
    auto it = grads_.kernels_.find(&kernel);
    if (it == grads_.kernels_.end()) {
      it = grads_.kernels_
               .emplace(&kernel,
                        ConvKernel(kernel.out_channels, kernel.in_channels, kernel.kh, kernel.kw))
               .first;
    }
    return it->second;
  }

 private:
  Gradients& grads_;
};

Var GradTape::input(FeatureMap value) {
  nodes_.push_back(Node{std::move(value), {}, {}});
  return Var{nodes_.size() - 1};
}

Var GradTape::record(FeatureMap value, std::vector<Var> inputs, BackwardFn backward) {
  for (const Var& v : inputs) {
    if (v.id >= nodes_.size()) throw std::out_of_range("GradTape: unknown input variable");
  }
  nodes_.push_back(Node{std::move(value), std::move(inputs), std::move(backward)});
  return Var{nodes_.size() - 1};
}

const FeatureMap& GradTape::value(Var v) const {
  if (v.id >= nodes_.size()) throw std::out_of_range("GradTape: unknown variable");
  return nodes_[v.id].value;
}

const ConvKernel& Gradients::kernel(const ConvKernel& k) const {
  const auto it = kernels_.find(&k);
  if (it == kernels_.end()) throw std::out_of_range("Gradients: kernel not on tape");
  return it->second;
}

FeatureMap Gradients::input(Var v) const {
  if (v.id >= values_.size()) throw std::out_of_range("Gradients: unknown variable");
  if (values_[v.id]) return *values_[v.id];
  return FeatureMap(shapes_[v.id]);
}

Gradients backward(const GradTape& tape, Var loss, const FeatureMap& loss_grad) {
  if (tape.empty()) throw std::logic_error("backward: tape is empty");
  const FeatureMap& out = tape.value(loss);
  if (out.shape() != Shape{1, 1, 1, 1}) {
    throw ShapeError("backward: loss must be scalar, got " + out.shape().str());
  }
  if (loss_grad.shape() != out.shape()) {
    throw ShapeError("backward: seed must be scalar, got " + loss_grad.shape().str());
  }

  Gradients grads;
  grads.values_.resize(tape.size());
  grads.shapes_.reserve(tape.size());
  for (const auto& node : tape.nodes_) grads.shapes_.push_back(node.value.shape());
  grads.values_[loss.id] = loss_grad;

  TapeSink sink(grads);
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    const auto& node = tape.nodes_[i];
    if (!node.backward || !grads.values_[i]) continue;
    node.backward(*grads.values_[i], sink);
  }
  return grads;
}

Gradients backward(const GradTape& tape, Var loss) {
  return backward(tape, loss, FeatureMap(Shape{1, 1, 1, 1}, 1.0));
}

namespace ad {

Var conv2d(GradTape& tape, Var x, const ConvKernel& k, int pad) {
  FeatureMap out = mwcnn::conv2d(tape.value(x), k, pad);
  const ConvKernel* kp = &k;
  return tape.record(std::move(out), {x}, [&tape, x, kp, pad](const FeatureMap& g, AdjointSink& sink) {
    FeatureMap dx;
    mwcnn::conv2d_backward(tape.value(x), *kp, pad, g, &dx, &sink.kernel_grad(*kp));
    sink.accumulate(x, dx);
  });
}

Var relu(GradTape& tape, Var x) {
  FeatureMap out = mwcnn::relu(tape.value(x));
  return tape.record(std::move(out), {x}, [&tape, x](const FeatureMap& g, AdjointSink& sink) {
    const auto in = tape.value(x).data();
    FeatureMap dx(g.shape());
    auto d = dx.data();
    const auto gd = g.data();
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = in[i] > 0.0 ? gd[i] : 0.0;
    sink.accumulate(x, dx);
  });
}

Var add(GradTape& tape, Var a, Var b) {
  FeatureMap out = mwcnn::add(tape.value(a), tape.value(b));
  return tape.record(std::move(out), {a, b}, [a, b](const FeatureMap& g, AdjointSink& sink) {
    sink.accumulate(a, g);
    sink.accumulate(b, g);
  });
}

Var concat_channels(GradTape& tape, Var a, Var b) {
  FeatureMap out = mwcnn::concat_channels(tape.value(a), tape.value(b));
  const int ca = tape.value(a).channels();
  const int cb = tape.value(b).channels();
  return tape.record(std::move(out), {a, b}, [a, b, ca, cb](const FeatureMap& g, AdjointSink& sink) {
    if (ca > 0) sink.accumulate(a, slice_channels(g, 0, ca));
    if (cb > 0) sink.accumulate(b, slice_channels(g, ca, cb));
  });
}

Var sum(GradTape& tape, Var x) {
  FeatureMap out(Shape{1, 1, 1, 1}, mwcnn::sum(tape.value(x)));
  const Shape s = tape.value(x).shape();
  return tape.record(std::move(out), {x}, [x, s](const FeatureMap& g, AdjointSink& sink) {
    sink.accumulate(x, FeatureMap(s, g.data()[0]));
  });
}

Var half_mse_loss(GradTape& tape, Var pred, const FeatureMap& target) {
  const FeatureMap& p = tape.value(pred);
  if (p.shape() != target.shape()) {
    throw ShapeError("half_mse_loss: prediction " + p.shape().str() + " vs target " +
                     target.shape().str());
  }
  FeatureMap diff = subtract(p, target);
  const double norm = 1.0 / (2.0 * p.batch());
  double acc = 0.0;
  for (double d : diff.data()) acc += d * d;
  FeatureMap out(Shape{1, 1, 1, 1}, acc * norm);
  return tape.record(std::move(out), {pred},
                     [pred, diff = std::move(diff), norm](const FeatureMap& g, AdjointSink& sink) {
                       sink.accumulate(pred, scale(diff, 2.0 * norm * g.data()[0]));
                     });
}

}  // namespace ad
}  // namespace mwcnn
