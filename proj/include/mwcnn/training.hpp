#pragma once

#include "mwcnn/network.hpp"
#include "mwcnn/optimizer.hpp"
#include "mwcnn/random.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <vector>

namespace mwcnn {

struct TrainConfig {
  AdamHyper adam;
  double lr_start = 1e-4;
  double lr_end = 1e-5;
  int epochs = 200;
  int batch = 24;
  int patch_size = 64;
  int patches = 2016;     // size of the pre-cropped patch pool
  double sigma = 25.0;    // noise std in 8-bit intensity units
  bool augment = true;
  std::uint64_t seed = 0;
  /// Written after every epoch when set.
  std::optional<std::filesystem::path> checkpoint;

  void validate() const;
  int steps_per_epoch() const;
};

/// Geometric decay lr_start·(lr_end/lr_start)^(epoch/(epochs−1)), exact at
/// both ends.
double lr_at(int epoch, const TrainConfig& cfg);

/// y = x + n with n ~ N(0, sigma²) i.i.d.; no clipping.
FeatureMap degrade_gaussian(const FeatureMap& x, double sigma, Rng& rng);

/// The 8 symmetries of the square: index & 3 quarter turns, bit 2 adds a
/// horizontal flip. Odd turn counts swap height and width.
FeatureMap dihedral(const FeatureMap& x, int index);

/// Uniform random patch_size² crops of randomly chosen images, each with a
/// uniformly drawn dihedral transform when `augment` is set. Images are
/// (1, 1, h, w) maps.
std::vector<FeatureMap> sample_patches(const std::vector<FeatureMap>& images, int patch_size, int count,
                                       bool augment, Rng& rng);

struct EpochRecord {
  int epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  double eval_psnr = 0.0;  // NaN when no evaluation set was given
};

struct TrainResult {
  std::vector<EpochRecord> curve;
  std::uint64_t steps = 0;
};

class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(const std::string& what, std::optional<std::filesystem::path> last_good)
      : std::runtime_error(what), last_good_checkpoint(std::move(last_good)) {}
  std::optional<std::filesystem::path> last_good_checkpoint;
};

/// Loss (1/(2N))·Σ‖F(y) − (y − x)‖² on one batch, computed on the tape, with
/// its parameter gradients ordered like net.parameters().
struct BatchGradient {
  double loss = 0.0;
  std::vector<ConvKernel> grads;
};
BatchGradient batch_gradient(const Network& net, const FeatureMap& noisy, const FeatureMap& clean);

/// Intensities in [0, 255] are scaled by 1/255 before entering the network.
inline constexpr double kIntensityScale = 1.0 / 255.0;

struct EvalResult {
  double psnr_noisy = 0.0;     // mean over images, noisy vs clean, unclipped
  double psnr_restored = 0.0;  // restored output clipped to [0, 255]
  double ssim_restored = 0.0;
};

/// Degrades each clean image (values in [0, 255]) with a seeded noise draw,
/// restores it and averages the metrics. Image sizes must be multiples of
/// net.size_multiple().
EvalResult evaluate_denoising(const Network& net, const std::vector<FeatureMap>& clean, double sigma,
                              std::uint64_t seed);

/// Restores a noisy [0, 255] image: y − F(y) in normalized units, clipped.
FeatureMap denoise_image(const Network& net, const FeatureMap& noisy);

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Adam on the residual loss over a pre-cropped patch pool drawn from
/// `images` ([0, 255] intensity maps). Fresh noise is drawn for every batch.
/// `eval_images`, when non-empty, is scored after every epoch.
TrainResult train(Network& net, const std::vector<FeatureMap>& images, const TrainConfig& cfg,
                  const std::vector<FeatureMap>& eval_images = {}, const EpochCallback& on_epoch = {});

/// CSV: epoch,lr,train_loss,eval_psnr (17 significant digits).
void write_loss_csv(std::ostream& out, const std::vector<EpochRecord>& curve);

}  // namespace mwcnn
