#pragma once

#include "mwcnn/tensor.hpp"

#include <functional>
#include <map>
#include <optional>
#include <vector>

namespace mwcnn {

/// Handle to a value recorded on a GradTape.
struct Var {
  std::size_t id = 0;
};

class Gradients;

/// Receives adjoints while a tape is replayed. Input adjoints are
/// accumulated, so an op may safely feed the same Var twice.
class AdjointSink {
 public:
  virtual ~AdjointSink() = default;
  virtual void accumulate(Var input, const FeatureMap& adjoint) = 0;
  virtual ConvKernel& kernel_grad(const ConvKernel& kernel) = 0;
};

/// Reverse-mode record of a forward computation. Operations append nodes in
/// execution order; backward() replays them in exact reverse. A tape is not
/// thread-safe.
class GradTape {
 public:
  using BackwardFn = std::function<void(const FeatureMap& grad_out, AdjointSink& sink)>;

  /// Leaf value (network input or constant).
  Var input(FeatureMap value);

  /// Appends an op node. `backward` receives the adjoint of `value`.
  Var record(FeatureMap value, std::vector<Var> inputs, BackwardFn backward);

  const FeatureMap& value(Var v) const;
  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }

 private:
  friend Gradients backward(const GradTape& tape, Var loss, const FeatureMap& loss_grad);

  struct Node {
    FeatureMap value;
    std::vector<Var> inputs;
    BackwardFn backward;  // empty for leaves
  };
  std::vector<Node> nodes_;
};

/// Result of a backward pass: adjoints for every kernel touched by the tape
/// and for every recorded value.
class Gradients {
 public:
  bool has_kernel(const ConvKernel& k) const { return kernels_.count(&k) != 0; }
  const ConvKernel& kernel(const ConvKernel& k) const;
  /// Zero-filled when the value did not influence the loss.
  FeatureMap input(Var v) const;

 private:
  friend Gradients backward(const GradTape& tape, Var loss, const FeatureMap& loss_grad);
  friend class TapeSink;

  std::map<const ConvKernel*, ConvKernel> kernels_;
  std::vector<std::optional<FeatureMap>> values_;
  std::vector<Shape> shapes_;
};

/// Replays `tape` backward from `loss` seeded with `loss_grad`. The loss must
/// be a scalar (1,1,1,1) map.
Gradients backward(const GradTape& tape, Var loss, const FeatureMap& loss_grad);
Gradients backward(const GradTape& tape, Var loss);

namespace ad {

Var conv2d(GradTape& tape, Var x, const ConvKernel& k, int pad);
Var relu(GradTape& tape, Var x);
Var add(GradTape& tape, Var a, Var b);
Var concat_channels(GradTape& tape, Var a, Var b);
/// Scalar sum of all elements.
Var sum(GradTape& tape, Var x);
/// (1/(2N))·‖pred − target‖², N = batch size of pred.
Var half_mse_loss(GradTape& tape, Var pred, const FeatureMap& target);

}  // namespace ad
}  // namespace mwcnn
