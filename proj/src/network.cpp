#include "mwcnn/network.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mwcnn {
namespace {

// Runs the node list against either plain values or a tape.
template <typename Ops, typename Value>
Value run_graph(const Network& net, Ops& ops, Value h) {
  const int pad = net.config().kernel_size / 2;
  std::vector<Value> skips(static_cast<std::size_t>(std::max(net.config().levels, 1)));
  for (const GraphNode& node : net.nodes()) {
    switch (node.kind) {
      case NodeKind::conv:
        h = ops.conv(h, net.parameters()[node.param], pad);
        if (node.relu) h = ops.relu(h);
        break;
      case NodeKind::dwt:
        h = ops.dwt(h, net.contract_wavelet());
        break;
      case NodeKind::iwt:
        h = ops.iwt(h, net.expand_wavelet());
        break;
      case NodeKind::save_skip:
        skips[node.level] = h;
        break;
      case NodeKind::merge_skip:
        h = net.config().skip == SkipMode::sum ? ops.add(h, skips[node.level])
                                               : ops.concat(h, skips[node.level]);
        break;
    }
  }
  return h;
}

struct ValueOps {
  FeatureMap conv(const FeatureMap& x, const ConvKernel& k, int pad) { return conv2d(x, k, pad); }
  FeatureMap relu(const FeatureMap& x) { return mwcnn::relu(x); }
  FeatureMap dwt(const FeatureMap& x, const WaveletSpec& s) { return dwt_layer(x, s); }
  FeatureMap iwt(const FeatureMap& x, const WaveletSpec& s) { return iwt_layer(x, s); }
  FeatureMap add(const FeatureMap& a, const FeatureMap& b) { return mwcnn::add(a, b); }
  FeatureMap concat(const FeatureMap& a, const FeatureMap& b) { return concat_channels(a, b); }
};

struct TapeOps {
  GradTape& tape;
  Var conv(Var x, const ConvKernel& k, int pad) { return ad::conv2d(tape, x, k, pad); }
  Var relu(Var x) { return ad::relu(tape, x); }
  Var dwt(Var x, const WaveletSpec& s) { return ad::dwt_layer(tape, x, s); }
  Var iwt(Var x, const WaveletSpec& s) { return ad::iwt_layer(tape, x, s); }
  Var add(Var a, Var b) { return ad::add(tape, a, b); }
  Var concat(Var a, Var b) { return ad::concat_channels(tape, a, b); }
};

}  // namespace

SkipMode parse_skip_mode(std::string_view name) {
  if (name == "sum") return SkipMode::sum;
  if (name == "concat") return SkipMode::concat;
  if (name == "none") return SkipMode::none;
  throw std::invalid_argument("unknown skip mode '" + std::string(name) + "'");
}

std::string_view to_string(SkipMode mode) {
  switch (mode) {
    case SkipMode::sum: return "sum";
    case SkipMode::concat: return "concat";
    case SkipMode::none: return "none";
  }
  return "?";
}

NetworkConfig NetworkConfig::scaled(int levels, int block_depth, int width) {
  NetworkConfig cfg;
  cfg.levels = levels;
  cfg.block_depth = block_depth;
  cfg.widths.clear();
  for (int l = 0; l <= levels; ++l) cfg.widths.push_back(width * (l == 0 ? 1 : l == 1 ? 2 : 4));
  return cfg;
}

NetworkConfig NetworkConfig::identity_blocks(int levels) {
  NetworkConfig cfg;
  cfg.levels = levels;
  cfg.block_depth = 1;
  cfg.kernel_size = 1;
  cfg.relu = false;
  cfg.skip = SkipMode::none;
  cfg.widths.clear();
  for (int l = 0, w = 1; l <= levels; ++l, w *= 4) cfg.widths.push_back(w);
  return cfg;
}

void NetworkConfig::validate() const {
  if (levels < 0 || levels > 4) throw std::invalid_argument("levels must be in 0..4");
  if (block_depth < 1) throw std::invalid_argument("block_depth must be >= 1");
  if (widths.size() != static_cast<std::size_t>(levels) + 1) {
    throw std::invalid_argument("expected " + std::to_string(levels + 1) + " widths, got " +
                                std::to_string(widths.size()));
  }
  if (std::any_of(widths.begin(), widths.end(), [](int w) { return w < 1; })) {
    throw std::invalid_argument("widths must be positive");
  }
  if (kernel_size < 1 || kernel_size % 2 == 0) throw std::invalid_argument("kernel_size must be odd");
  if (in_channels < 1) throw std::invalid_argument("in_channels must be >= 1");
}

Network::Network(NetworkConfig config)
    : config_(std::move(config)),
      down_(WaveletSpec::make(config_.wavelet, config_.normalization)),
      up_(WaveletSpec::make(config_.expand_wavelet.value_or(config_.wavelet), config_.normalization)) {
  config_.validate();
  const int D = config_.block_depth;
  const int K = config_.kernel_size;
  const int L = config_.levels;
  const auto& w = config_.widths;
  const bool act = config_.relu;
  const bool skips = config_.skip != SkipMode::none && L > 0;

  auto conv = [&](int in, int out, bool relu) {
    params_.emplace_back(out, in, K, K);
    nodes_.push_back(GraphNode{NodeKind::conv, static_cast<int>(params_.size()) - 1, relu, 0});
  };
  // Block of D convs: first maps `in` channels, last maps to `out`.
  auto block = [&](int in, int mid, int out, bool last_relu) {
    for (int i = 0; i < D; ++i) {
      const int cin = i == 0 ? in : mid;
      const int cout = i == D - 1 ? out : mid;
      conv(cin, cout, i == D - 1 ? last_relu : act);
    }
  };

  block(config_.in_channels, w[0], w[0], act);
  for (int l = 1; l <= L; ++l) {
    if (skips) nodes_.push_back(GraphNode{NodeKind::save_skip, -1, false, l - 1});
    nodes_.push_back(GraphNode{NodeKind::dwt});
    block(4 * w[l - 1], w[l], w[l], act);
  }
  int incoming = L > 0 ? w[L] : w[0];
  for (int l = L; l >= 1; --l) {
    block(incoming, w[l], 4 * w[l - 1], act);
    nodes_.push_back(GraphNode{NodeKind::iwt});
    incoming = w[l - 1];
    if (skips) {
      nodes_.push_back(GraphNode{NodeKind::merge_skip, -1, false, l - 1});
      if (config_.skip == SkipMode::concat) incoming *= 2;
    }
  }
  block(incoming, w[0], config_.in_channels, false);
}

Network build_mwcnn(const NetworkConfig& config) { return Network(config); }

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (const auto& k : params_) n += k.parameter_count();
  return n;
}

std::size_t Network::count(NodeKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [kind](const GraphNode& n) { return n.kind == kind; }));
}

void Network::init_he(Rng& rng) {
  for (auto& k : params_) {
    const double stddev = std::sqrt(2.0 / (static_cast<double>(k.in_channels) * k.kh * k.kw));
    for (double& v : k.weights) v = rng.normal() * stddev;
    std::fill(k.bias.begin(), k.bias.end(), 0.0);
  }
}

void Network::zero() {
  for (auto& k : params_) {
    std::fill(k.weights.begin(), k.weights.end(), 0.0);
    std::fill(k.bias.begin(), k.bias.end(), 0.0);
  }
}

void Network::set_identity() {
  for (auto& k : params_) {
    if (k.kh != 1 || k.kw != 1 || k.in_channels != k.out_channels) {
      throw std::logic_error("set_identity: kernel is not a square 1x1 map");
    }
    std::fill(k.weights.begin(), k.weights.end(), 0.0);
    std::fill(k.bias.begin(), k.bias.end(), 0.0);
    for (int c = 0; c < k.out_channels; ++c) k.w(c, c, 0, 0) = 1.0;
  }
}

void Network::check_input(const Shape& s) const {
  if (s.c != config_.in_channels) {
    throw ShapeError("network expects " + std::to_string(config_.in_channels) + " input channels, got " +
                     s.str());
  }
  const int m = size_multiple();
  if (s.h % m != 0 || s.w % m != 0) {
    throw ShapeError("input " + s.str() + " not divisible by 2^" + std::to_string(config_.levels));
  }
}

FeatureMap Network::forward(const FeatureMap& y) const {
  check_input(y.shape());
  ValueOps ops;
  return run_graph(*this, ops, y);
}

Var Network::forward(GradTape& tape, Var y) const {
  check_input(tape.value(y).shape());
  TapeOps ops{tape};
  return run_graph(*this, ops, y);
}

FeatureMap Network::restore(const FeatureMap& y) const { return subtract(y, forward(y)); }

}  // namespace mwcnn
