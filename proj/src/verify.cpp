#include "mwcnn/verify.hpp"

#include "mwcnn/equivalence.hpp"
#include "mwcnn/gradcheck.hpp"
#include "mwcnn/network.hpp"
#include "mwcnn/random.hpp"
#include "mwcnn/wavelet.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace mwcnn {
namespace {

Shape random_shape(Rng& rng, int max_side) {
  const int h = 2 * (2 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(max_side / 2 - 1))));
  const int w = 2 * (2 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(max_side / 2 - 1))));
  return Shape{1 + static_cast<int>(rng.uniform_int(2)), 1 + static_cast<int>(rng.uniform_int(3)), h, w};
}

CheckResult reconstruction(const std::string& name, const WaveletSpec& spec, double tol,
                           const VerifyOptions& o) {
  Rng rng(o.seed);
  double worst = 0.0;
  for (int t = 0; t < o.trials; ++t) {
    const FeatureMap x = random_map(random_shape(rng, 32), rng, -10.0, 10.0);
    worst = std::max(worst, max_abs_diff(iwt2(dwt2(x, spec), spec), x));
  }
  return {name, worst <= tol, worst, tol, std::to_string(o.trials) + " random inputs"};
}

CheckResult wpt_roundtrip(const VerifyOptions& o) {
  Rng rng(o.seed + 1);
  const auto spec = WaveletSpec::haar();
  double worst = 0.0;
  for (int t = 0; t < o.trials; ++t) {
    const FeatureMap x = random_map(Shape{1, 2, 16, 16}, rng, -10.0, 10.0);
    worst = std::max(worst, max_abs_diff(wpt_reconstruct(wpt_decompose(x, spec, 3), spec, 3), x));
  }
  return {"wpt3_reconstruction", worst <= 1e-11, worst, 1e-11, "3-level packet tree"};
}

CheckResult pooling(const VerifyOptions& o) {
  Rng rng(o.seed + 2);
  const auto spec = WaveletSpec::haar();
  double worst = 0.0;
  for (int t = 0; t < o.trials; ++t) {
    const FeatureMap x = random_map(random_shape(rng, 16), rng, -10.0, 10.0);
    worst = std::max(worst, max_abs_diff(equivalence::avg_pool2(x), scale(dwt2(x, spec).ll, 0.25)));
  }
  return {"pooling_equals_ll_quarter", worst == 0.0, worst, 0.0, "bitwise"};
}

CheckResult dilated(const VerifyOptions& o, bool grouped) {
  Rng rng(o.seed + (grouped ? 4 : 3));
  double worst = 0.0;
  for (int t = 0; t < o.trials; ++t) {
    const int side = 2 * (5 + static_cast<int>(rng.uniform_int(4)));
    const FeatureMap x = random_map(Shape{1, 2, side, side}, rng, -10.0, 10.0);
    const ConvKernel k = random_kernel(2, 2, 3, 3, rng);
    const FeatureMap direct = equivalence::dilated_conv2(x, k);
    const FeatureMap full = grouped ? equivalence::dilated_via_grouped(x, k) : equivalence::subband_dilated_conv2(x, k);
    worst = std::max(worst, max_abs_diff(direct, equivalence::dilated_interior(full, k)));
  }
  return {grouped ? "grouped_subband_equals_dilated" : "subband_equals_dilated", worst <= 1e-10, worst, 1e-10,
          "valid interior"};
}

CheckResult gradient(const std::string& name, const LossBuilder& build, std::vector<FeatureMap> inputs,
                     std::vector<ConvKernel*> kernels) {
  const GradCheckResult r = check_gradients(build, inputs, kernels);
  return {name, r.max_rel_error <= 1e-4, r.max_rel_error, 1e-4,
          std::to_string(r.entries) + " entries; worst " + r.worst};
}

std::vector<CheckResult> gradient_checks(const VerifyOptions& o) {
  Rng rng(o.seed + 5);
  std::vector<CheckResult> out;

  ConvKernel k = random_kernel(3, 2, 3, 3, rng);
  for (double& b : k.bias) b = rng.uniform() - 0.5;
  const FeatureMap conv_target = random_map(Shape{2, 3, 5, 6}, rng);
  out.push_back(gradient(
      "grad_conv2d",
      [&](GradTape& t, const std::vector<Var>& in) {
        return ad::half_mse_loss(t, ad::conv2d(t, in[0], k, 1), conv_target);
      },
      {random_map(Shape{2, 2, 5, 6}, rng)}, {&k}));

  const FeatureMap small_target = random_map(Shape{1, 2, 4, 4}, rng);
  out.push_back(gradient(
      "grad_relu",
      [&](GradTape& t, const std::vector<Var>& in) { return ad::half_mse_loss(t, ad::relu(t, in[0]), small_target); },
      {random_map(Shape{1, 2, 4, 4}, rng)}, {}));
  out.push_back(gradient(
      "grad_add",
      [&](GradTape& t, const std::vector<Var>& in) {
        return ad::half_mse_loss(t, ad::add(t, in[0], in[1]), small_target);
      },
      {random_map(Shape{1, 2, 4, 4}, rng), random_map(Shape{1, 2, 4, 4}, rng)}, {}));
  const FeatureMap cat_target = random_map(Shape{1, 3, 4, 4}, rng);
  out.push_back(gradient(
      "grad_concat_channels",
      [&](GradTape& t, const std::vector<Var>& in) {
        return ad::half_mse_loss(t, ad::concat_channels(t, in[0], in[1]), cat_target);
      },
      {random_map(Shape{1, 1, 4, 4}, rng), random_map(Shape{1, 2, 4, 4}, rng)}, {}));

  for (const WaveletKind kind : {WaveletKind::haar, WaveletKind::db2}) {
    const WaveletSpec spec = WaveletSpec::make(kind);
    const std::string suffix(to_string(kind));
    const FeatureMap dwt_target = random_map(Shape{1, 8, 4, 4}, rng);
    out.push_back(gradient(
        "grad_dwt_layer_" + suffix,
        [&](GradTape& t, const std::vector<Var>& in) {
          return ad::half_mse_loss(t, ad::dwt_layer(t, in[0], spec), dwt_target);
        },
        {random_map(Shape{1, 2, 8, 8}, rng)}, {}));
    const FeatureMap iwt_target = random_map(Shape{1, 1, 8, 8}, rng);
    out.push_back(gradient(
        "grad_iwt_layer_" + suffix,
        [&](GradTape& t, const std::vector<Var>& in) {
          return ad::half_mse_loss(t, ad::iwt_layer(t, in[0], spec), iwt_target);
        },
        {random_map(Shape{1, 4, 4, 4}, rng)}, {}));
  }

  Network net(NetworkConfig::scaled(2, 1, 4));
  net.init_he(rng);
  for (auto& kk : net.parameters())
    for (double& b : kk.bias) b = 0.1 * (rng.uniform() - 0.5);
  const FeatureMap noisy = random_map(Shape{1, 1, 8, 8}, rng, 0.0, 1.0);
  const FeatureMap residual_target = random_map(Shape{1, 1, 8, 8}, rng, -0.2, 0.2);
  std::vector<ConvKernel*> params;
  for (auto& kk : net.parameters()) params.push_back(&kk);
  out.push_back(gradient(
      "grad_tiny_mwcnn",
      [&](GradTape& t, const std::vector<Var>& in) {
        return ad::half_mse_loss(t, net.forward(t, in[0]), residual_target);
      },
      {noisy}, params));
  return out;
}

std::vector<CheckResult> gridding_checks() {
  std::vector<CheckResult> out;
  for (int depth = 1; depth <= 4; ++depth) {
    const auto r = equivalence::gridding_report(depth);
    const bool ok = !r.dilated.has_adjacent_pair() && r.wavelet.dense();
    out.push_back({"gridding_depth_" + std::to_string(depth), ok, ok ? 0.0 : 1.0, 0.0,
                   "dilated " + std::to_string(r.dilated.count()) + " sparse positions; wavelet " +
                       std::to_string(r.wavelet.count()) + " dense positions"});
  }
  return out;
}

CheckResult identity_blocks(const VerifyOptions& o) {
  Rng rng(o.seed + 6);
  Network net(NetworkConfig::identity_blocks(3));
  net.set_identity();
  const FeatureMap y = random_map(Shape{2, 1, 16, 16}, rng, -10.0, 10.0);
  const double err = max_abs_diff(net.forward(y), y);
  return {"identity_blocks_reduce_to_wpt", err <= 1e-12, err, 1e-12, "levels=3"};
}

}  // namespace

std::vector<CheckResult> run_verification(const VerifyOptions& options) {
  std::vector<CheckResult> checks;
  WaveletSpec haar = WaveletSpec::haar();
  if (options.corrupt_haar_tap) haar.analysis[0][0] += 0.5;
  checks.push_back(reconstruction("haar_reconstruction", haar, 1e-12, options));
  checks.push_back(reconstruction("db2_reconstruction", WaveletSpec::db2(), 1e-10, options));
  checks.push_back(wpt_roundtrip(options));
  checks.push_back(pooling(options));
  checks.push_back(dilated(options, false));
  checks.push_back(dilated(options, true));
  for (auto& c : gradient_checks(options)) checks.push_back(std::move(c));
  for (auto& c : gridding_checks()) checks.push_back(std::move(c));
  checks.push_back(identity_blocks(options));
  return checks;
}

void print_checks(std::ostream& out, const std::vector<CheckResult>& checks) {
  out << "check,status,error,tolerance,detail\n";
  const auto old = out.precision(3);
  for (const auto& c : checks) {
    out << c.name << ',' << (c.passed ? "PASS" : "FAIL") << ',' << std::scientific << c.error << ','
        << c.tolerance << std::defaultfloat << ',' << c.detail << '\n';
  }
  out.precision(old);
}

}  // namespace mwcnn
