#pragma once

#include "mwcnn/network.hpp"
#include "mwcnn/tensor.hpp"
#include "mwcnn/wavelet.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace mwcnn::cli {

/// Pads bottom/right by mirror reflection (edge pixel not repeated) until
/// both extents are multiples of `multiple`.
FeatureMap reflect_pad(const FeatureMap& x, int multiple);

/// Parallelism cap from MWCNN_THREADS (default 1).
int thread_limit();

struct TrainOptions {
  std::filesystem::path data;
  double sigma = 25.0;
  int levels = 3;
  int width = 64;
  int block_depth = 3;
  int epochs = 200;
  int batch = 24;
  int patch = 64;
  int patches = 2016;
  double lr_start = 1e-4;
  double lr_end = 1e-5;
  std::uint64_t seed = 0;
  std::string skip = "sum";
  std::string wavelet = "haar";
  std::string expand_wavelet;  // empty: same as wavelet
  bool orthonormal = false;
  bool no_augment = false;
  std::filesystem::path out = "mwcnn.ckpt";
  std::filesystem::path loss_csv;  // default: <out>.loss.csv
  std::filesystem::path eval;      // optional held-out directory
};

struct DenoiseOptions {
  std::filesystem::path model;
  std::filesystem::path input;   // image file or directory
  std::filesystem::path gt;      // optional ground truth (file or directory)
  std::optional<double> sigma;   // when set, input is clean and noise is synthesized
  std::uint64_t seed = 0;
  std::filesystem::path output;  // file or directory; default next to input
};

struct DwtOptions {
  std::filesystem::path input;
  int levels = 1;
  std::string wavelet = "haar";
  bool orthonormal = false;
  std::filesystem::path out = "subbands";
  std::filesystem::path inverse;  // raw dump to reconstruct from
  std::filesystem::path output;   // image written by --inverse
};

struct VerifyCliOptions {
  std::uint64_t seed = 2024;
  int trials = 20;
  bool corrupt_haar_tap = false;
};

struct GriddingOptions {
  int depth = 3;
  std::filesystem::path pgm_prefix;  // optional: <prefix>_dilated.pgm / _wavelet.pgm
};

struct SynthOptions {
  std::filesystem::path out;
  int count = 8;
  int height = 128;
  int width = 128;
  std::uint64_t seed = 0;
};

int cmd_train(const TrainOptions& o, std::ostream& out, std::ostream& err);
int cmd_denoise(const DenoiseOptions& o, std::ostream& out, std::ostream& err);
int cmd_dwt(const DwtOptions& o, std::ostream& out, std::ostream& err);
int cmd_verify(const VerifyCliOptions& o, std::ostream& out, std::ostream& err);
int cmd_gridding(const GriddingOptions& o, std::ostream& out, std::ostream& err);
int cmd_synth(const SynthOptions& o, std::ostream& out, std::ostream& err);

/// Raw coefficient dump written by `dwt`: every packet leaf in f64 plus
/// enough metadata to reconstruct and crop back to the source size.
struct SubbandDump {
  int levels = 1;
  WaveletKind wavelet = WaveletKind::haar;
  Normalization normalization = Normalization::paper;
  int source_height = 0;
  int source_width = 0;
  std::vector<FeatureMap> leaves;
};

void write_subband_dump(const std::filesystem::path& path, const SubbandDump& dump);
SubbandDump read_subband_dump(const std::filesystem::path& path);
/// Inverse packet transform of the dump, cropped to the source size.
FeatureMap reconstruct_dump(const SubbandDump& dump);

/// Affine 8-bit view of a subband: 128 + v/scale, scale = max|v|/127.
FeatureMap subband_view(const FeatureMap& band);

/// Full command-line entry point.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mwcnn::cli
