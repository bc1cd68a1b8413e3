#pragma once

#include "mwcnn/network.hpp"
#include "mwcnn/optimizer.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>

namespace mwcnn {

// Binary layout, all integers little-endian, reals IEEE-754 binary64:
//
//   "MWCNNCKP"                      8-byte magic
//   u32 version                     currently 1
//   u32 levels, u32 block_depth
//   u32 width count, u32 × widths
//   u32 wavelet id (0 haar, 1 db2), u32 expand wavelet id (0xFFFFFFFF = same)
//   u32 skip mode (0 sum, 1 concat, 2 none), u32 normalization (0 paper, 1 orthonormal)
//   u32 kernel size, u32 relu flag, u32 input channels
//   u64 training step
//   u32 parameter count, then per parameter:
//     u32 out, u32 in, u32 kh, u32 kw, f64 × weights, f64 × biases
//   u8 has optimizer state; if 1: u64 t, then per parameter m.weights,
//     m.bias, v.weights, v.bias as f64 arrays

inline constexpr std::uint32_t kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Checkpoint {
  Network network;
  std::uint64_t step = 0;
  std::optional<AdamState> adam;
};

void write_checkpoint(std::ostream& out, const Network& net, std::uint64_t step,
                      const AdamState* adam = nullptr);
Checkpoint read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const Network& net, std::uint64_t step,
                     const AdamState* adam = nullptr);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace mwcnn
