#include "mwcnn/checkpoint.hpp"

#include "mwcnn/binary_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace mwcnn {
namespace {

constexpr std::array<char, 8> kMagic{'M', 'W', 'C', 'N', 'N', 'C', 'K', 'P'};
constexpr std::uint32_t kSameWavelet = 0xFFFFFFFFu;

using binary::put;
using binary::put_f64s;

template <typename U>
U get(std::istream& in) {
  try {
    return binary::get<U>(in);
  } catch (const binary::FormatError&) {
    throw CheckpointError("checkpoint: truncated file");
  }
}

void get_array(std::istream& in, std::span<double> values) {
  for (double& v : values) v = std::bit_cast<double>(get<std::uint64_t>(in));
}

std::uint32_t wavelet_id(WaveletKind k) { return k == WaveletKind::haar ? 0 : 1; }

WaveletKind wavelet_from(std::uint32_t id) {
  if (id == 0) return WaveletKind::haar;
  if (id == 1) return WaveletKind::db2;
  throw CheckpointError("checkpoint: unknown wavelet id " + std::to_string(id));
}

std::uint32_t skip_id(SkipMode m) {
  switch (m) {
    case SkipMode::sum: return 0;
    case SkipMode::concat: return 1;
    case SkipMode::none: return 2;
  }
  return 0;
}

SkipMode skip_from(std::uint32_t id) {
  switch (id) {
    case 0: return SkipMode::sum;
    case 1: return SkipMode::concat;
    case 2: return SkipMode::none;
    default: throw CheckpointError("checkpoint: unknown skip mode " + std::to_string(id));
  }
}

}  // namespace

void write_checkpoint(std::ostream& out, const Network& net, std::uint64_t step,
                      const AdamState* adam) {
  const NetworkConfig& cfg = net.config();
  out.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(cfg.levels));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(cfg.block_depth));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(cfg.widths.size()));
  for (int w : cfg.widths) put<std::uint32_t>(out, static_cast<std::uint32_t>(w));
  put<std::uint32_t>(out, wavelet_id(cfg.wavelet));
  put<std::uint32_t>(out, cfg.expand_wavelet ? wavelet_id(*cfg.expand_wavelet) : kSameWavelet);
  put<std::uint32_t>(out, skip_id(cfg.skip));
  put<std::uint32_t>(out, cfg.normalization == Normalization::paper ? 0u : 1u);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(cfg.kernel_size));
  put<std::uint32_t>(out, cfg.relu ? 1u : 0u);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(cfg.in_channels));
  put<std::uint64_t>(out, step);

  const auto& params = net.parameters();
  put<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
  for (const auto& k : params) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(k.out_channels));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(k.in_channels));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(k.kh));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(k.kw));
    put_f64s(out, k.weights);
    put_f64s(out, k.bias);
  }
  put<std::uint8_t>(out, adam ? 1 : 0);
  if (adam) {
    if (adam->m.size() != params.size() || adam->v.size() != params.size()) {
      throw CheckpointError("checkpoint: optimizer state does not match parameters");
    }
    put<std::uint64_t>(out, adam->t);
    for (std::size_t i = 0; i < params.size(); ++i) {
      put_f64s(out, adam->m[i].weights);
      put_f64s(out, adam->m[i].bias);
      put_f64s(out, adam->v[i].weights);
      put_f64s(out, adam->v[i].bias);
    }
  }
  if (!out) throw CheckpointError("checkpoint: write failed");
}

Checkpoint read_checkpoint(std::istream& in) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw CheckpointError("checkpoint: bad magic bytes");
  }
  const auto version = get<std::uint32_t>(in);
  if (version != kCheckpointVersion) {
    throw CheckpointError("checkpoint: unsupported version " + std::to_string(version));
  }
  NetworkConfig cfg;
  cfg.levels = static_cast<int>(get<std::uint32_t>(in));
  cfg.block_depth = static_cast<int>(get<std::uint32_t>(in));
  const auto width_count = get<std::uint32_t>(in);
  if (width_count > 16) throw CheckpointError("checkpoint: implausible width count");
  cfg.widths.resize(width_count);
  for (int& w : cfg.widths) w = static_cast<int>(get<std::uint32_t>(in));
  cfg.wavelet = wavelet_from(get<std::uint32_t>(in));
  if (const auto up = get<std::uint32_t>(in); up != kSameWavelet) cfg.expand_wavelet = wavelet_from(up);
  cfg.skip = skip_from(get<std::uint32_t>(in));
  cfg.normalization = get<std::uint32_t>(in) == 0 ? Normalization::paper : Normalization::orthonormal;
  cfg.kernel_size = static_cast<int>(get<std::uint32_t>(in));
  cfg.relu = get<std::uint32_t>(in) != 0;
  cfg.in_channels = static_cast<int>(get<std::uint32_t>(in));
  const auto step = get<std::uint64_t>(in);

  Checkpoint ck{Network(cfg), step, std::nullopt};
  auto& params = ck.network.parameters();
  const auto count = get<std::uint32_t>(in);
  if (count != params.size()) {
    throw CheckpointError("checkpoint: " + std::to_string(count) + " parameters, architecture has " +
                          std::to_string(params.size()));
  }
  for (auto& k : params) {
    const int dims[4] = {static_cast<int>(get<std::uint32_t>(in)), static_cast<int>(get<std::uint32_t>(in)),
                         static_cast<int>(get<std::uint32_t>(in)), static_cast<int>(get<std::uint32_t>(in))};
    if (dims[0] != k.out_channels || dims[1] != k.in_channels || dims[2] != k.kh || dims[3] != k.kw) {
      throw CheckpointError("checkpoint: parameter shape disagrees with architecture");
    }
    get_array(in, k.weights);
    get_array(in, k.bias);
  }
  if (get<std::uint8_t>(in) == 1) {
    AdamState s = AdamState::like(params);
    s.t = get<std::uint64_t>(in);
    for (std::size_t i = 0; i < params.size(); ++i) {
      get_array(in, s.m[i].weights);
      get_array(in, s.m[i].bias);
      get_array(in, s.v[i].weights);
      get_array(in, s.v[i].bias);
    }
    ck.adam = std::move(s);
  }
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const Network& net, std::uint64_t step,
                     const AdamState* adam) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("checkpoint: cannot open " + tmp.string());
    write_checkpoint(out, net, step, adam);
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("checkpoint: cannot open " + path.string());
  return read_checkpoint(in);
}

}  // namespace mwcnn
