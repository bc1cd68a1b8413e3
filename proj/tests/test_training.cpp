#include <doctest.h>

#include "mwcnn/checkpoint.hpp"
#include "mwcnn/dataset.hpp"
#include "mwcnn/metrics.hpp"
#include "mwcnn/optimizer.hpp"
#include "mwcnn/training.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>

using namespace mwcnn;
namespace fs = std::filesystem;

namespace {

std::vector<ConvKernel> one_param(double w) {
  ConvKernel k(1, 1, 1, 1);
  k.weights[0] = w;
  return {k};
}

std::vector<ConvKernel> grad_of(double g) {
  ConvKernel k(1, 1, 1, 1);
  k.weights[0] = g;
  k.bias[0] = g;
  return {k};
}

std::vector<double> sorted_values(const FeatureMap& x) {
  std::vector<double> v(x.data().begin(), x.data().end());
  std::sort(v.begin(), v.end());
  return v;
}

std::vector<FeatureMap> small_images() {
  std::vector<FeatureMap> images;
  for (std::uint64_t s = 0; s < 3; ++s) images.push_back(synthetic_image(32, 32, s));
  return images;
}

TrainConfig tiny_config() {
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch = 2;
  cfg.patch_size = 16;
  cfg.patches = 6;
  cfg.lr_start = 1e-3;
  cfg.lr_end = 1e-4;
  cfg.seed = 11;
  return cfg;
}

}  // namespace

TEST_CASE("Adam first step moves by lr/(1+eps)") {
  auto params = one_param(0.0);
  AdamState state = AdamState::like(params);
  adam_step(params, grad_of(1.0), state, 1e-3);
  CHECK(params[0].weights[0] == doctest::Approx(-1e-3 / (1.0 + 1e-8)).epsilon(1e-14));
  CHECK(params[0].bias[0] == doctest::Approx(-1e-3 / (1.0 + 1e-8)).epsilon(1e-14));
  CHECK(state.t == 1u);
}

TEST_CASE("Adam leaves parameters alone under zero gradients") {
  auto params = one_param(0.37);
  AdamState state = AdamState::like(params);
  for (int i = 0; i < 50; ++i) adam_step(params, grad_of(0.0), state, 1e-2);
  CHECK(params[0].weights[0] == 0.37);
}

TEST_CASE("Adam is sign symmetric and scale consistent at the first step") {
  ConvKernel k(2, 1, 1, 1);
  std::vector<ConvKernel> params{k};
  ConvKernel g(2, 1, 1, 1);
  g.weights = {0.3, -0.3};
  AdamState state = AdamState::like(params);
  adam_step(params, {g}, state, 1e-3);
  CHECK(params[0].weights[0] == -params[0].weights[1]);

  ConvKernel mixed(3, 1, 1, 1);
  mixed.weights = {2.0, -0.5, 1e-3};
  for (const double c : {1e-4, 1.0, 1e4}) {
    std::vector<ConvKernel> p{ConvKernel(3, 1, 1, 1)};
    AdamState s = AdamState::like(p);
    ConvKernel scaled = mixed;
    for (double& v : scaled.weights) v *= c;
    adam_step(p, {scaled}, s, 1e-3);
    for (int i = 0; i < 3; ++i) CHECK(std::signbit(p[0].weights[i]) == !std::signbit(mixed.weights[i]));
  }
}

TEST_CASE("Adam refuses non-finite gradients before updating") {
  auto params = one_param(1.0);
  AdamState state = AdamState::like(params);
  CHECK_THROWS_AS(adam_step(params, grad_of(std::nan("")), state, 1e-3), NonFiniteGradient);
  CHECK(params[0].weights[0] == 1.0);
  CHECK(state.t == 0u);
}

TEST_CASE("geometric learning-rate schedule") {
  TrainConfig cfg;
  CHECK(lr_at(0, cfg) == 1e-4);
  CHECK(lr_at(199, cfg) == 1e-5);
  const double ratio = lr_at(100, cfg) / lr_at(99, cfg);
  for (int e = 1; e < 199; ++e) CHECK(lr_at(e, cfg) / lr_at(e - 1, cfg) == doctest::Approx(ratio).epsilon(1e-12));
  CHECK_THROWS(lr_at(200, cfg));
}

TEST_CASE("Gaussian degradation") {
  Rng rng(1);
  const FeatureMap x(Shape{1, 1, 1000, 1000}, 128.0);
  CHECK(max_abs_diff(degrade_gaussian(x, 0.0, rng), x) == 0.0);
  const FeatureMap y = degrade_gaussian(x, 25.0, rng);
  double mean = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double d = y.data()[i] - x.data()[i];
    mean += d;
    sq += d * d;
  }
  mean /= static_cast<double>(y.size());
  const double sd = std::sqrt(sq / static_cast<double>(y.size()) - mean * mean);
  CHECK(std::abs(sd - 25.0) < 0.25);
  CHECK(std::abs(psnr(y, x) - 20.0 * std::log10(255.0 / 25.0)) < 0.2);
  CHECK(20.0 * std::log10(255.0 / 25.0) == doctest::Approx(20.1720).epsilon(1e-5));
}

TEST_CASE("dihedral transforms") {
  Rng rng(2);
  const FeatureMap x = random_map(Shape{1, 1, 4, 6}, rng);
  CHECK(max_abs_diff(dihedral(x, 0), x) == 0.0);
  CHECK(dihedral(x, 1).shape() == Shape{1, 1, 6, 4});
  CHECK(max_abs_diff(dihedral(dihedral(x, 2), 2), x) == 0.0);
  CHECK(max_abs_diff(dihedral(dihedral(x, 4), 4), x) == 0.0);
  CHECK(dihedral(x, 4).at(0, 0, 1, 0) == x.at(0, 0, 1, 5));
  const FeatureMap sq = random_map(Shape{1, 1, 5, 5}, rng);
  const auto ref = sorted_values(sq);
  for (int i = 0; i < 8; ++i) {
    CHECK(sorted_values(dihedral(sq, i)) == ref);
    for (int j = 0; j < i; ++j) CHECK(max_abs_diff(dihedral(sq, i), dihedral(sq, j)) > 0.0);
  }
}

TEST_CASE("patch sampling") {
  const auto images = small_images();
  Rng a(3), b(3);
  const auto pa = sample_patches(images, 16, 10, false, a);
  const auto pb = sample_patches(images, 16, 10, false, b);
  REQUIRE(pa.size() == 10u);
  for (std::size_t i = 0; i < pa.size(); ++i) {
    CHECK(pa[i].shape() == Shape{1, 1, 16, 16});
    CHECK(max_abs_diff(pa[i], pb[i]) == 0.0);
  }
  Rng c(4);
  for (const auto& p : sample_patches({FeatureMap(Shape{1, 1, 20, 20}, 9.0)}, 8, 5, true, c))
    for (double v : p.data()) CHECK(v == 9.0);
  CHECK_THROWS(sample_patches(images, 64, 1, false, c));
}

TEST_CASE("batch loss matches a naive evaluation of the residual objective") {
  Network net(NetworkConfig::scaled(1, 1, 4));
  Rng rng(5);
  net.init_he(rng);
  const FeatureMap clean = random_map(Shape{3, 1, 8, 8}, rng, 0.0, 1.0);
  const FeatureMap noisy = degrade_gaussian(clean, 0.1, rng);
  const FeatureMap residual = net.forward(noisy);
  double oracle = 0.0;
  for (int n = 0; n < 3; ++n)
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j) {
        const double d = residual.at(n, 0, i, j) - (noisy.at(n, 0, i, j) - clean.at(n, 0, i, j));
        oracle += d * d;
      }
  oracle /= 2.0 * 3;
  const BatchGradient bg = batch_gradient(net, noisy, clean);
  CHECK(std::abs(bg.loss - oracle) <= 1e-10 * oracle);
  CHECK(bg.grads.size() == net.parameters().size());

  Network zero(NetworkConfig::scaled(1, 1, 4));
  zero.zero();
  CHECK(batch_gradient(zero, clean, clean).loss == 0.0);
}

TEST_CASE("training is deterministic under a fixed seed") {
  const auto images = small_images();
  std::string csv[2];
  for (int run = 0; run < 2; ++run) {
    Network net(NetworkConfig::scaled(1, 1, 4));
    Rng rng(6);
    net.init_he(rng);
    const TrainResult r = train(net, images, tiny_config(), {images[0]});
    CHECK(r.curve.size() == 3u);
    CHECK(r.steps == 9u);
    std::ostringstream s;
    write_loss_csv(s, r.curve);
    csv[run] = s.str();
  }
  CHECK(csv[0] == csv[1]);
  CHECK(csv[0].rfind("epoch,lr,train_loss,eval_psnr\n0,0.001,", 0) == 0);
}

TEST_CASE("training rejects patch sizes the network cannot take") {
  Network net(NetworkConfig::scaled(2, 1, 2));
  TrainConfig cfg = tiny_config();
  cfg.patch_size = 18;
  CHECK_THROWS_AS(train(net, small_images(), cfg), std::invalid_argument);
}

TEST_CASE("divergence reports the last good checkpoint") {
  const fs::path ckpt = fs::temp_directory_path() / "mwcnn_diverge_test.ckpt";
  fs::remove(ckpt);
  Network net(NetworkConfig::scaled(0, 5, 4));
  Rng rng(7);
  net.init_he(rng);
  TrainConfig cfg = tiny_config();
  cfg.epochs = 20;
  cfg.patches = 2;
  cfg.lr_start = cfg.lr_end = 1e200;
  cfg.checkpoint = ckpt;
  bool diverged = false;
  try {
    train(net, small_images(), cfg);
  } catch (const TrainingDiverged& e) {
    diverged = true;
    REQUIRE(e.last_good_checkpoint.has_value());
    CHECK(*e.last_good_checkpoint == ckpt);
    CHECK(load_checkpoint(ckpt).network.parameter_count() == net.parameter_count());
  }
  CHECK(diverged);
  fs::remove(ckpt);
}

TEST_CASE("evaluation of the zero network reports the noisy baseline") {
  Network net(NetworkConfig::scaled(1, 1, 2));
  net.zero();
  const std::vector<FeatureMap> clean{synthetic_image(256, 256, 1)};
  const EvalResult r = evaluate_denoising(net, clean, 25.0, 3);
  CHECK(std::abs(r.psnr_noisy - 20.17) < 0.2);
  CHECK(r.psnr_restored >= r.psnr_noisy);
  CHECK(r.ssim_restored < 1.0);
}
