#include "mwcnn/training.hpp"

#include "mwcnn/checkpoint.hpp"
#include "mwcnn/metrics.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>

namespace mwcnn {

void TrainConfig::validate() const {
  if (!(lr_start > 0.0) || !(lr_end > 0.0) || lr_end > lr_start) {
    throw std::invalid_argument("learning rates must satisfy 0 < lr_end <= lr_start");
  }
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (batch < 1) throw std::invalid_argument("batch must be >= 1");
  if (patch_size < 1) throw std::invalid_argument("patch size must be >= 1");
  if (patches < batch) throw std::invalid_argument("patch pool smaller than one batch");
  if (sigma < 0.0) throw std::invalid_argument("sigma must be >= 0");
}

int TrainConfig::steps_per_epoch() const { return std::max(1, patches / batch); }

double lr_at(int epoch, const TrainConfig& cfg) {
  if (epoch < 0 || epoch >= cfg.epochs) {
    throw std::out_of_range("lr_at: epoch " + std::to_string(epoch) + " outside [0, " +
                            std::to_string(cfg.epochs) + ")");
  }
  if (epoch == 0 || cfg.epochs == 1) return cfg.lr_start;
  if (epoch == cfg.epochs - 1) return cfg.lr_end;
  const double frac = static_cast<double>(epoch) / (cfg.epochs - 1);
  return cfg.lr_start * std::pow(cfg.lr_end / cfg.lr_start, frac);
}

FeatureMap degrade_gaussian(const FeatureMap& x, double sigma, Rng& rng) {
  if (sigma < 0.0) throw std::invalid_argument("degrade_gaussian: negative sigma");
  FeatureMap y = x;
  if (sigma == 0.0) return y;
  for (double& v : y.data()) v += sigma * rng.normal();
  return y;
}

FeatureMap dihedral(const FeatureMap& x, int index) {
  if (index < 0 || index > 7) throw std::invalid_argument("dihedral: index must be in 0..7");
  FeatureMap cur = x;
  for (int r = 0; r < (index & 3); ++r) {
    // Quarter turn counter-clockwise: out(i, j) = in(j, w − 1 − i).
    const Shape s = cur.shape();
    FeatureMap next(Shape{s.n, s.c, s.w, s.h});
    for (int n = 0; n < s.n; ++n)
      for (int c = 0; c < s.c; ++c)
        for (int i = 0; i < s.w; ++i)
          for (int j = 0; j < s.h; ++j) next.at(n, c, i, j) = cur.at(n, c, j, s.w - 1 - i);
    cur = std::move(next);
  }
  if (index & 4) {
    const Shape s = cur.shape();
    FeatureMap next(s);
    for (int n = 0; n < s.n; ++n)
      for (int c = 0; c < s.c; ++c)
        for (int i = 0; i < s.h; ++i)
          for (int j = 0; j < s.w; ++j) next.at(n, c, i, j) = cur.at(n, c, i, s.w - 1 - j);
    cur = std::move(next);
  }
  return cur;
}

std::vector<FeatureMap> sample_patches(const std::vector<FeatureMap>& images, int patch_size, int count,
                                       bool augment, Rng& rng) {
  if (images.empty()) throw std::invalid_argument("sample_patches: no images");
  if (patch_size < 1 || count < 0) throw std::invalid_argument("sample_patches: bad patch request");
  for (const auto& img : images) {
    if (img.height() < patch_size || img.width() < patch_size) {
      throw ShapeError("sample_patches: image " + img.shape().str() + " smaller than patch " +
                       std::to_string(patch_size));
    }
  }
  std::vector<FeatureMap> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const auto& img = images[rng.uniform_int(images.size())];
    const int top = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(img.height() - patch_size + 1)));
    const int left = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(img.width() - patch_size + 1)));
    FeatureMap patch = crop(img, top, left, patch_size, patch_size);
    if (augment) patch = dihedral(patch, static_cast<int>(rng.uniform_int(8)));
    out.push_back(std::move(patch));
  }
  return out;
}

BatchGradient batch_gradient(const Network& net, const FeatureMap& noisy, const FeatureMap& clean) {
  GradTape tape;
  const Var y = tape.input(noisy);
  const Var pred = net.forward(tape, y);
  const Var loss = ad::half_mse_loss(tape, pred, subtract(noisy, clean));
  const Gradients g = backward(tape, loss);
  BatchGradient out;
  out.loss = tape.value(loss).data()[0];
  out.grads.reserve(net.parameters().size());
  for (const auto& k : net.parameters()) {
    out.grads.push_back(g.has_kernel(k) ? g.kernel(k) : ConvKernel(k.out_channels, k.in_channels, k.kh, k.kw));
  }
  return out;
}

FeatureMap denoise_image(const Network& net, const FeatureMap& noisy) {
  const FeatureMap restored = net.restore(scale(noisy, kIntensityScale));
  return clip_intensity(scale(restored, 1.0 / kIntensityScale));
}

EvalResult evaluate_denoising(const Network& net, const std::vector<FeatureMap>& clean, double sigma,
                              std::uint64_t seed) {
  if (clean.empty()) throw std::invalid_argument("evaluate_denoising: no images");
  EvalResult r;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    Rng rng(seed + i);
    const FeatureMap noisy = degrade_gaussian(clean[i], sigma, rng);
    const FeatureMap restored = denoise_image(net, noisy);
    r.psnr_noisy += psnr(noisy, clean[i]);
    r.psnr_restored += psnr(restored, clean[i]);
    if (clean[i].height() >= 11 && clean[i].width() >= 11) r.ssim_restored += ssim(restored, clean[i]);
  }
  const double n = static_cast<double>(clean.size());
  r.psnr_noisy /= n;
  r.psnr_restored /= n;
  r.ssim_restored /= n;
  return r;
}

TrainResult train(Network& net, const std::vector<FeatureMap>& images, const TrainConfig& cfg,
                  const std::vector<FeatureMap>& eval_images, const EpochCallback& on_epoch) {
  cfg.validate();
  if (images.empty()) throw std::invalid_argument("train: empty dataset");
  if (cfg.patch_size % net.size_multiple() != 0) {
    throw std::invalid_argument("train: patch size " + std::to_string(cfg.patch_size) +
                                " not divisible by 2^" + std::to_string(net.config().levels));
  }
  Rng rng(cfg.seed);
  std::vector<FeatureMap> pool = sample_patches(images, cfg.patch_size, cfg.patches, cfg.augment, rng);
  for (auto& p : pool) p = scale(p, kIntensityScale);
  const double sigma = cfg.sigma * kIntensityScale;

  AdamState state = AdamState::like(net.parameters());
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const Shape batch_shape{cfg.batch, 1, cfg.patch_size, cfg.patch_size};
  const std::size_t plane = batch_shape.plane();

  TrainResult result;
  std::optional<std::filesystem::path> last_good;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = lr_at(epoch, cfg);
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.uniform_int(i)]);

    double loss_sum = 0.0;
    const int steps = cfg.steps_per_epoch();
    for (int s = 0; s < steps; ++s) {
      FeatureMap clean(batch_shape);
      for (int b = 0; b < cfg.batch; ++b) {
        const auto& p = pool[order[static_cast<std::size_t>(s) * cfg.batch + b]];
        std::copy(p.data().begin(), p.data().end(), clean.data().begin() + static_cast<std::ptrdiff_t>(b * plane));
      }
      const FeatureMap noisy = degrade_gaussian(clean, sigma, rng);
      BatchGradient bg = batch_gradient(net, noisy, clean);
      if (!std::isfinite(bg.loss)) {
        throw TrainingDiverged("training diverged at epoch " + std::to_string(epoch) + " step " +
                                   std::to_string(result.steps) + " (loss is not finite)",
                               last_good);
      }
      try {
        adam_step(net.parameters(), bg.grads, state, lr, cfg.adam);
      } catch (const NonFiniteGradient& e) {
        throw TrainingDiverged(e.what(), last_good);
      }
      loss_sum += bg.loss;
      ++result.steps;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = lr;
    rec.train_loss = loss_sum / steps;
    rec.eval_psnr = eval_images.empty()
                        ? std::numeric_limits<double>::quiet_NaN()
                        : evaluate_denoising(net, eval_images, cfg.sigma, cfg.seed ^ 0xE7A1ull).psnr_restored;
    if (cfg.checkpoint) {
      save_checkpoint(*cfg.checkpoint, net, result.steps, &state);
      last_good = cfg.checkpoint;
    }
    result.curve.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  return result;
}

void write_loss_csv(std::ostream& out, const std::vector<EpochRecord>& curve) {
  out << "epoch,lr,train_loss,eval_psnr\n";
  const auto old = out.precision(17);
  for (const auto& r : curve) {
    out << r.epoch << ',' << r.lr << ',' << r.train_loss << ',';
    if (std::isnan(r.eval_psnr)) {
      out << "nan";
    } else {
      out << r.eval_psnr;
    }
    out << '\n';
  }
  out.precision(old);
}

}  // namespace mwcnn
