#include <doctest.h>

#include "mwcnn/autograd.hpp"
#include "mwcnn/gradcheck.hpp"
#include "mwcnn/random.hpp"

#include <stdexcept>

using namespace mwcnn;

TEST_CASE("backward visits recorded ops in exact reverse order") {
  GradTape tape;
  std::vector<int> visits;
  Var v = tape.input(FeatureMap(Shape{1, 1, 1, 1}, 1.0));
  for (int i = 0; i < 6; ++i) {
    v = tape.record(tape.value(v), {v}, [&visits, i, v](const FeatureMap& g, AdjointSink& sink) {
      visits.push_back(i);
      sink.accumulate(v, g);
    });
  }
  backward(tape, v);
  CHECK(visits == std::vector<int>{5, 4, 3, 2, 1, 0});
}

TEST_CASE("sum of relu of positive input has all-ones adjoint") {
  Rng rng(1);
  GradTape tape;
  const Var x = tape.input(random_map(Shape{2, 2, 3, 3}, rng, 0.1, 2.0));
  const Gradients g = backward(tape, ad::sum(tape, ad::relu(tape, x)));
  const FeatureMap adj = g.input(x);
  for (double v : adj.data()) CHECK(v == 1.0);
}

TEST_CASE("identity 1x1 kernel gets the input sum as weight adjoint") {
  Rng rng(2);
  const FeatureMap xv = random_map(Shape{2, 1, 4, 5}, rng);
  ConvKernel k(1, 1, 1, 1);
  k.weights[0] = 1.0;
  GradTape tape;
  const Var x = tape.input(xv);
  const Gradients g = backward(tape, ad::sum(tape, ad::conv2d(tape, x, k, 0)));
  CHECK(g.has_kernel(k));
  CHECK(g.kernel(k).weights[0] == doctest::Approx(sum(xv)).epsilon(1e-14));
  CHECK(g.kernel(k).bias[0] == doctest::Approx(40.0));
}

TEST_CASE("a value used twice accumulates both adjoints") {
  GradTape tape;
  const Var x = tape.input(FeatureMap(Shape{1, 1, 2, 2}, {1, -2, 3, -4}));
  const Gradients g = backward(tape, ad::sum(tape, ad::add(tape, x, x)));
  const FeatureMap adj = g.input(x);
  for (double v : adj.data()) CHECK(v == 2.0);
}

TEST_CASE("unused values get zero adjoints") {
  GradTape tape;
  const Var x = tape.input(FeatureMap(Shape{1, 1, 2, 2}, 1.0));
  const Var unused = tape.input(FeatureMap(Shape{1, 3, 2, 2}, 1.0));
  const Gradients g = backward(tape, ad::sum(tape, x));
  const FeatureMap gu = g.input(unused);
  CHECK(gu.shape() == Shape{1, 3, 2, 2});
  for (double v : gu.data()) CHECK(v == 0.0);
}

TEST_CASE("backward rejects non-scalar losses and empty tapes") {
  GradTape tape;
  const Var x = tape.input(FeatureMap(Shape{1, 1, 2, 2}, 1.0));
  CHECK_THROWS_AS(backward(tape, x), std::invalid_argument);
  GradTape empty;
  CHECK_THROWS(backward(empty, Var{0}));
}

TEST_CASE("half_mse_loss matches a naive double loop") {
  Rng rng(3);
  const FeatureMap pred = random_map(Shape{3, 1, 5, 4}, rng);
  const FeatureMap target = random_map(Shape{3, 1, 5, 4}, rng);
  double oracle = 0.0;
  for (int n = 0; n < 3; ++n) {
    double per_image = 0.0;
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 4; ++j) {
        const double d = pred.at(n, 0, i, j) - target.at(n, 0, i, j);
        per_image += d * d;
      }
    oracle += per_image;
  }
  oracle /= 2.0 * 3.0;
  GradTape tape;
  const Var loss = ad::half_mse_loss(tape, tape.input(pred), target);
  CHECK(tape.value(loss).data()[0] == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("every op passes a central finite-difference check") {
  Rng rng(4);
  for (int trial = 0; trial < 3; ++trial) {
    const int h = 3 + static_cast<int>(rng.uniform_int(4));
    const int w = 3 + static_cast<int>(rng.uniform_int(4));
    ConvKernel k = random_kernel(2, 3, 3, 3, rng);
    for (double& b : k.bias) b = rng.uniform() - 0.5;
    const FeatureMap t2 = random_map(Shape{2, 2, h, w}, rng);
    std::vector<FeatureMap> in{random_map(Shape{2, 3, h, w}, rng)};
    for (int pad : {0, 1}) {
      const FeatureMap target = pad == 1 ? t2 : random_map(Shape{2, 2, h - 2, w - 2}, rng);
      const auto r = check_gradients(
          [&](GradTape& t, const std::vector<Var>& v) {
            return ad::half_mse_loss(t, ad::conv2d(t, v[0], k, pad), target);
          },
          in, {&k});
      CHECK(r.max_rel_error <= 1e-4);
    }

    std::vector<FeatureMap> pair{random_map(Shape{1, 2, h, w}, rng), random_map(Shape{1, 2, h, w}, rng)};
    const FeatureMap relu_target = random_map(pair[0].shape(), rng);
    const auto r_relu = check_gradients(
        [&](GradTape& t, const std::vector<Var>& v) {
          return ad::half_mse_loss(t, ad::relu(t, ad::add(t, v[0], v[1])), relu_target);
        },
        pair, {});
    CHECK(r_relu.max_rel_error <= 1e-4);

    std::vector<FeatureMap> cat{random_map(Shape{1, 1, h, w}, rng), random_map(Shape{1, 2, h, w}, rng)};
    const FeatureMap cat_target = random_map(Shape{1, 3, h, w}, rng);
    const auto r_cat = check_gradients(
        [&](GradTape& t, const std::vector<Var>& v) {
          return ad::half_mse_loss(t, ad::concat_channels(t, v[0], v[1]), cat_target);
        },
        cat, {});
    CHECK(r_cat.max_rel_error <= 1e-4);

    std::vector<FeatureMap> single{random_map(Shape{1, 2, h, w}, rng)};
    const auto r_sum = check_gradients(
        [&](GradTape& t, const std::vector<Var>& v) { return ad::sum(t, ad::relu(t, v[0])); }, single, {});
    CHECK(r_sum.max_rel_error <= 1e-4);
  }
}
