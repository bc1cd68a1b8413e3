#pragma once

#include "mwcnn/autograd.hpp"
#include "mwcnn/random.hpp"
#include "mwcnn/tensor.hpp"
#include "mwcnn/wavelet.hpp"

#include <optional>
#include <string_view>
#include <vector>

namespace mwcnn {

/// How contracting-path features rejoin the expanding path.
enum class SkipMode { sum, concat, none };

SkipMode parse_skip_mode(std::string_view name);
std::string_view to_string(SkipMode mode);

struct NetworkConfig {
  int levels = 3;
  int block_depth = 3;                        // convs per block
  std::vector<int> widths{64, 128, 256, 256};  // channels per level, levels + 1 entries
  SkipMode skip = SkipMode::sum;
  WaveletKind wavelet = WaveletKind::haar;
  /// Wavelet for the expanding path when it differs from the contracting one
  /// (Haar down / DB2 up). Such a network no longer inverts exactly.
  std::optional<WaveletKind> expand_wavelet;
  Normalization normalization = Normalization::paper;
  int kernel_size = 3;
  bool relu = true;
  int in_channels = 1;

  /// widths = width · (1, 2, 4, 4, ...) truncated to levels + 1 entries.
  static NetworkConfig scaled(int levels, int block_depth, int width);

  /// 1×1 kernels, no activation, no skips and widths 4^l so that every block
  /// can be set to the identity; the network then computes a plain wavelet
  /// packet analysis followed by synthesis.
  static NetworkConfig identity_blocks(int levels);

  void validate() const;
};

enum class NodeKind { conv, dwt, iwt, save_skip, merge_skip };

struct GraphNode {
  NodeKind kind = NodeKind::conv;
  int param = -1;    // conv: index into Network::parameters()
  bool relu = false; // conv: ReLU after the convolution
  int level = 0;     // save_skip / merge_skip: skip slot
};

/// The MWCNN layer sequence and its parameters. forward() predicts the
/// residual y − x; restore() returns y − forward(y).
class Network {
 public:
  explicit Network(NetworkConfig config);

  const NetworkConfig& config() const { return config_; }
  const std::vector<GraphNode>& nodes() const { return nodes_; }
  std::vector<ConvKernel>& parameters() { return params_; }
  const std::vector<ConvKernel>& parameters() const { return params_; }

  std::size_t parameter_count() const;
  std::size_t count(NodeKind kind) const;
  /// Input extents must be multiples of this.
  int size_multiple() const { return 1 << config_.levels; }

  /// He fan-in normal weights, zero biases.
  void init_he(Rng& rng);
  void zero();
  /// Sets every kernel to the channel identity. Requires square 1×1 kernels.
  void set_identity();

  const WaveletSpec& contract_wavelet() const { return down_; }
  const WaveletSpec& expand_wavelet() const { return up_; }

  FeatureMap forward(const FeatureMap& y) const;
  Var forward(GradTape& tape, Var y) const;
  FeatureMap restore(const FeatureMap& y) const;

 private:
  void check_input(const Shape& s) const;

  NetworkConfig config_;
  WaveletSpec down_;
  WaveletSpec up_;
  std::vector<GraphNode> nodes_;
  std::vector<ConvKernel> params_;
};

Network build_mwcnn(const NetworkConfig& config);

}  // namespace mwcnn
