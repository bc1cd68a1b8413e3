// Acceptance gate: one PASS/FAIL line per criterion. Exit status is nonzero
// when any criterion fails.

#include "mwcnn/checkpoint.hpp"
#include "mwcnn/dataset.hpp"
#include "mwcnn/equivalence.hpp"
#include "mwcnn/random.hpp"
#include "mwcnn/training.hpp"
#include "mwcnn/verify.hpp"
#include "mwcnn/wavelet.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace mwcnn;
namespace fs = std::filesystem;

namespace {

constexpr int kTrials = 100;

constexpr double kHaarTol = 1e-12;
constexpr double kDb2Tol = 1e-10;
constexpr double kWptTol = 1e-11;
constexpr double kDilatedTol = 1e-10;
constexpr double kGradTol = 1e-4;
constexpr double kGradSeconds = 60.0;
constexpr double kIdentityTol = 1e-12;
constexpr double kGainDb = 3.0;
constexpr double kTrainSeconds = 15.0 * 60.0;
constexpr double kOverfitRatio = 1e-4;
constexpr int kOverfitSteps = 2000;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
  if (!pass) ++failures;
  std::cout << "criterion " << id << ": " << (pass ? "PASS" : "FAIL") << "  " << detail << std::endl;
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

std::string fixed(double v, int digits = 2) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// Even extents in [4, 32], or multiples of `multiple` when larger than 2.
Shape random_shape(Rng& rng, int multiple = 2) {
  auto side = [&] {
    const int lo = std::max(4, multiple);
    const int n = (32 - lo) / multiple + 1;
    return lo + multiple * static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n)));
  };
  const int n = 1 + static_cast<int>(rng.uniform_int(2));
  const int c = 1 + static_cast<int>(rng.uniform_int(3));
  const int h = side();
  return Shape{n, c, h, side()};
}

void reconstruction() {
  Rng rng(101);
  const auto haar = WaveletSpec::haar();
  const auto db2 = WaveletSpec::db2();
  double e_haar = 0.0, e_db2 = 0.0, e_wpt = 0.0;
  for (int t = 0; t < kTrials; ++t) {
    const FeatureMap x = random_map(random_shape(rng), rng, -10.0, 10.0);
    e_haar = std::max(e_haar, max_abs_diff(iwt2(dwt2(x, haar), haar), x));
    e_db2 = std::max(e_db2, max_abs_diff(iwt2(dwt2(x, db2), db2), x));
    const FeatureMap z = random_map(random_shape(rng, 8), rng, -10.0, 10.0);
    e_wpt = std::max(e_wpt, max_abs_diff(wpt_reconstruct(wpt_decompose(z, haar, 3), haar, 3), z));
  }
  report(1, e_haar <= kHaarTol && e_db2 <= kDb2Tol && e_wpt <= kWptTol,
         "haar " + sci(e_haar) + " db2 " + sci(e_db2) + " wpt3 " + sci(e_wpt) + " over " +
             std::to_string(kTrials) + " inputs");
}

void pooling() {
  Rng rng(202);
  const auto haar = WaveletSpec::haar();
  double worst = 0.0;
  for (int t = 0; t < kTrials; ++t) {
    const FeatureMap x = random_map(random_shape(rng), rng, -10.0, 10.0);
    worst = std::max(worst, max_abs_diff(equivalence::avg_pool2(x), scale(dwt2(x, haar).ll, 0.25)));
  }
  report(2, worst == 0.0, "max diff " + sci(worst) + " over " + std::to_string(kTrials) + " inputs");
}

void dilated() {
  Rng rng(303);
  double e_sub = 0.0, e_grp = 0.0;
  for (int t = 0; t < kTrials; ++t) {
    const int h = 2 * (5 + static_cast<int>(rng.uniform_int(12)));
    const int w = 2 * (5 + static_cast<int>(rng.uniform_int(12)));
    const int c = 1 + static_cast<int>(rng.uniform_int(3));
    const FeatureMap x = random_map(Shape{1 + static_cast<int>(rng.uniform_int(2)), c, h, w}, rng, -10.0, 10.0);
    ConvKernel k = random_kernel(1 + static_cast<int>(rng.uniform_int(3)), c, 3, 3, rng);
    for (double& b : k.bias) b = rng.uniform() - 0.5;
    const FeatureMap direct = equivalence::dilated_conv2(x, k);
    e_sub = std::max(e_sub, max_abs_diff(direct, equivalence::dilated_interior(equivalence::subband_dilated_conv2(x, k), k)));
    e_grp = std::max(e_grp, max_abs_diff(direct, equivalence::dilated_interior(equivalence::dilated_via_grouped(x, k), k)));
  }
  report(3, e_sub <= kDilatedTol && e_grp <= kDilatedTol,
         "subband " + sci(e_sub) + " grouped " + sci(e_grp) + " over " + std::to_string(kTrials) + " pairs");
}

void gradients() {
  const auto t0 = Clock::now();
  const auto checks = run_verification();
  const double elapsed = seconds_since(t0);

  bool ok = true;
  int count = 0;
  double worst = 0.0;
  std::string worst_name;
  for (const auto& c : checks) {
    if (c.name.rfind("grad_", 0) != 0) continue;
    ++count;
    ok = ok && c.error <= kGradTol;
    if (c.error >= worst) {
      worst = c.error;
      worst_name = c.name;
    }
  }
  report(4, ok && count >= 9 && elapsed < kGradSeconds,
         std::to_string(count) + " checks incl. tiny MWCNN, worst rel " + sci(worst) + " (" + worst_name +
             "), suite " + fixed(elapsed, 1) + " s");
}

void identity() {
  double err = 0.0;
  for (int levels = 1; levels <= 3; ++levels) {
    Network net(NetworkConfig::identity_blocks(levels));
    net.set_identity();
    Rng rng(505 + static_cast<std::uint64_t>(levels));
    for (int t = 0; t < 10; ++t) {
      const int h = 8 * (1 + static_cast<int>(rng.uniform_int(4)));
      const FeatureMap y = random_map(Shape{2, 1, h, 16}, rng, -10.0, 10.0);
      err = std::max(err, max_abs_diff(net.forward(y), y));
    }
  }
  report(5, err <= kIdentityTol, "identity blocks, levels 1-3, max diff " + sci(err));
}

void gridding() {
  bool ok = true;
  std::string detail;
  for (int depth = 1; depth <= 4; ++depth) {
    const auto r = equivalence::gridding_report(depth);
    ok = ok && !r.dilated.has_adjacent_pair() && r.wavelet.dense();
    detail += "d" + std::to_string(depth) + " dilated " + std::to_string(r.dilated.count()) + "/" +
              (r.dilated.has_adjacent_pair() ? "adjacent" : "sparse") + " wavelet " +
              std::to_string(r.wavelet.count()) + "/" + (r.wavelet.dense() ? "dense" : "holes") +
              (depth < 4 ? "; " : "");
  }
  report(8, ok, detail);
}

std::vector<FeatureMap> images(std::uint64_t first, int count, int side = 128) {
  std::vector<FeatureMap> out;
  for (int i = 0; i < count; ++i) out.push_back(synthetic_image(side, side, first + static_cast<std::uint64_t>(i)));
  return out;
}

TrainConfig desk_config() {
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.batch = 8;
  cfg.patch_size = 64;
  cfg.patches = 2016;
  cfg.lr_start = 1e-3;
  cfg.lr_end = 1e-4;
  cfg.sigma = 25.0;
  cfg.seed = 1;
  return cfg;
}

double overfit_ratio(const NetworkConfig& cfg, double& first, double& last) {
  Network net(cfg);
  Rng rng(1);
  net.init_he(rng);
  const FeatureMap clean = scale(crop(synthetic_image(128, 128, 0), 32, 32, 32, 32), kIntensityScale);
  const FeatureMap noisy = degrade_gaussian(clean, 25.0 * kIntensityScale, rng);
  AdamState state = AdamState::like(net.parameters());
  for (int s = 0; s < kOverfitSteps; ++s) {
    const BatchGradient bg = batch_gradient(net, noisy, clean);
    if (s == 0) first = bg.loss;
    last = bg.loss;
    adam_step(net.parameters(), bg.grads, state, 1e-3);
  }
  last = batch_gradient(net, noisy, clean).loss;
  return last / first;
}

void desk_denoising() {
  const auto train_set = images(0, 8);
  const auto held_out = images(100, 4);
  const NetworkConfig arch = NetworkConfig::scaled(2, 2, 16);

  Network net(arch);
  Rng rng(7);
  net.init_he(rng);
  const TrainConfig cfg = desk_config();
  const auto t0 = Clock::now();
  const TrainResult result = train(net, train_set, cfg, {}, [](const EpochRecord& r) {
    std::cerr << "  desk epoch " << r.epoch << " loss " << r.train_loss << std::endl;
  });
  const double elapsed = seconds_since(t0);
  const EvalResult eval = evaluate_denoising(net, held_out, cfg.sigma, 99);
  const double gain = eval.psnr_restored - eval.psnr_noisy;

  bool monotone = true;
  for (std::size_t i = 1; i < result.curve.size(); ++i)
    monotone = monotone && result.curve[i].train_loss <= result.curve[i - 1].train_loss;

  double first = 0.0, last = 0.0;
  const double ratio = overfit_ratio(arch, first, last);

  report(6, gain >= kGainDb && elapsed <= kTrainSeconds && ratio <= kOverfitRatio,
         "held-out noisy " + fixed(eval.psnr_noisy) + " dB restored " + fixed(eval.psnr_restored) + " dB gain " +
             fixed(gain) + " dB, train " + fixed(elapsed, 0) + " s, epoch loss " +
             (monotone ? "monotone" : "not monotone") + "; overfit " + sci(first) + " -> " + sci(last) +
             " ratio " + sci(ratio) + " in " + std::to_string(kOverfitSteps) + " steps");
}

struct Variant {
  std::string name;
  NetworkConfig config;
};

void ablation() {
  NetworkConfig mw0 = NetworkConfig::scaled(0, 3, 22);
  NetworkConfig mw2 = NetworkConfig::scaled(2, 2, 4);
  NetworkConfig mw3 = NetworkConfig::scaled(3, 2, 3);
  mw3.widths = {3, 6, 12, 8};
  const std::vector<Variant> variants{{"MWCNN-0", mw0}, {"MWCNN-2", mw2}, {"MWCNN-3", mw3}};

  const auto train_set = images(0, 8);
  const auto held_out = images(100, 4);
  TrainConfig cfg = desk_config();
  cfg.epochs = 3;
  cfg.patches = 512;

  std::vector<double> mean(variants.size(), 0.0);
  std::string detail;
  for (std::size_t v = 0; v < variants.size(); ++v) {
    std::string runs;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      Network net(variants[v].config);
      Rng rng(1000 + seed);
      net.init_he(rng);
      cfg.seed = 2000 + seed;
      train(net, train_set, cfg);
      const double p = evaluate_denoising(net, held_out, cfg.sigma, 99).psnr_restored;
      mean[v] += p / 3.0;
      runs += (seed ? "," : "") + fixed(p);
    }
    detail += variants[v].name + " (" + std::to_string(Network(variants[v].config).parameter_count()) +
              " params) mean " + fixed(mean[v]) + " [" + runs + "]; ";
    std::cerr << "  ablation " << variants[v].name << " " << fixed(mean[v]) << std::endl;
  }
  detail += std::string("MWCNN-3 vs MWCNN-2 (reported) ") + (mean[2] >= mean[1] ? "+" : "") +
            fixed(mean[2] - mean[1]) + " dB";
  report(7, mean[1] >= mean[0], detail);
}

void determinism() {
  const auto train_set = images(0, 5, 64);
  TrainConfig cfg = desk_config();
  cfg.epochs = 3;
  cfg.batch = 4;
  cfg.patch_size = 32;
  cfg.patches = 16;
  cfg.seed = 42;

  std::string csv[2];
  Network trained(NetworkConfig::scaled(2, 1, 4));
  for (int run = 0; run < 2; ++run) {
    Network net(NetworkConfig::scaled(2, 1, 4));
    Rng rng(9);
    net.init_he(rng);
    std::ostringstream s;
    write_loss_csv(s, train(net, train_set, cfg, {train_set[0]}).curve);
    csv[run] = s.str();
    trained = net;
  }

  const fs::path path = fs::temp_directory_path() / "mwcnn_acceptance.ckpt";
  save_checkpoint(path, trained, 12);
  const Network loaded = load_checkpoint(path).network;
  fs::remove(path);
  Rng rng(10);
  double diff = 0.0;
  for (int t = 0; t < 5; ++t) {
    const FeatureMap y = random_map(Shape{2, 1, 32, 32}, rng, 0.0, 1.0);
    diff = std::max(diff, max_abs_diff(loaded.forward(y), trained.forward(y)));
  }
  report(9, csv[0] == csv[1] && !csv[0].empty() && diff == 0.0,
         std::string("loss CSVs ") + (csv[0] == csv[1] ? "identical" : "differ") +
             ", reloaded forward max diff " + sci(diff));
}

}  // namespace

int main() {
  reconstruction();
  pooling();
  dilated();
  gradients();
  identity();
  desk_denoising();
  ablation();
  gridding();
  determinism();
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
