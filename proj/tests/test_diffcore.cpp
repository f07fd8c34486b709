#include <doctest.h>

#include <cmath>

#include "fd_check.hpp"
#include "hvr/ops.hpp"
#include "hvr/rng.hpp"
#include "hvr/tensor.hpp"

using namespace hvr;

namespace {

Tensor random_tensor(Shape dims, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(dims));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
  return t;
}

// scalar head so every op can be FD-checked through a fixed random readout
Tensor readout(const Tensor& t, const std::vector<double>& coeff) {
  Tensor w = Tensor::from_values(t.dims(), coeff);
  return weighted_avg_pool(reshape(t, {t.size(), 1}),
                           reshape(w, {t.size()}));
}

std::vector<double> random_coeff(std::size_t n, Rng& rng) {
  std::vector<double> c(n);
  for (double& v : c) v = rng.uniform(-1.0, 1.0);
  return c;
}

}  // namespace

TEST_SUITE_BEGIN("diffcore");

TEST_CASE("concat_channels shapes and backward split") {
  Rng rng(1);
  Tensor a = random_tensor({2, 2, 2, 3}, rng);
  Tensor b = random_tensor({2, 2, 2, 5}, rng);
  a.set_requires_grad(true);
  b.set_requires_grad(true);
  Tensor c = concat_channels(a, b);
  CHECK(c.dims() == Shape{2, 2, 2, 8});

  // sum(c) gradient is all-ones; it must split into two all-ones gradients
  Tensor total = weighted_avg_pool(reshape(c, {c.size(), 1}),
                                   Tensor({c.size()}, 1.0));
  total.backward();
  for (double g : a.grad()) CHECK(g == doctest::Approx(1.0));
  for (double g : b.grad()) CHECK(g == doctest::Approx(1.0));

  CHECK_THROWS(concat_channels(a, random_tensor({2, 2, 1, 5}, rng)));
}

TEST_CASE("concat_channels gradient matches finite differences") {
  Rng rng(2);
  for (int rep = 0; rep < 5; ++rep) {
    Tensor a = random_tensor({2, 2, 2, 3}, rng);
    Tensor b = random_tensor({2, 2, 2, 5}, rng);
    auto coeff = random_coeff(8 * 8, rng);
    double err = fd_max_rel_error(
        {&a, &b}, [&] { return readout(concat_channels(a, b), coeff); });
    CHECK(err < 1e-6);
  }
}

TEST_CASE("conv3d forward shape and gradients") {
  Rng rng(3);
  Tensor in = random_tensor({4, 3, 2, 3}, rng);
  Tensor w = random_tensor({3, 3, 1, 3, 4}, rng);
  Tensor out = conv3d(in, w, {1, 1, 1}, {1, 1, 0});
  CHECK(out.dims() == Shape{4, 3, 2, 4});

  // strided patch conv
  Tensor wp = random_tensor({2, 2, 2, 3, 4}, rng);
  Tensor pooled = conv3d(in, wp, {2, 2, 2}, {0, 0, 0});
  CHECK(pooled.dims() == Shape{2, 1, 1, 4});

  for (int rep = 0; rep < 5; ++rep) {
    Tensor a = random_tensor({3, 3, 2, 2}, rng);
    Tensor k = random_tensor({3, 3, 1, 2, 3}, rng);
    auto coeff = random_coeff(3 * 3 * 2 * 3, rng);
    double err = fd_max_rel_error({&a, &k}, [&] {
      return readout(conv3d(a, k, {1, 1, 1}, {1, 1, 0}), coeff);
    });
    CHECK(err < 1e-4);
  }
}

TEST_CASE("linear and relu gradients") {
  Rng rng(4);
  for (int rep = 0; rep < 5; ++rep) {
    Tensor x = random_tensor({6}, rng);
    // keep relu inputs away from the kink
    for (std::size_t i = 0; i < x.size(); ++i)
      if (std::abs(x[i]) < 0.05) x[i] = 0.1;
    Tensor w = random_tensor({6, 4}, rng);
    auto coeff = random_coeff(4, rng);
    double err = fd_max_rel_error(
        {&x, &w}, [&] { return readout(relu(linear(x, w)), coeff); });
    CHECK(err < 1e-4);
  }
}

TEST_CASE("weighted_avg_pool selects and averages") {
  Rng rng(5);
  Tensor feat = random_tensor({2, 2, 1, 3}, rng);

  Tensor onehot({2, 2, 1}, 0.0);
  onehot[2] = 1.0;
  Tensor picked = weighted_avg_pool(feat, onehot);
  for (std::size_t c = 0; c < 3; ++c)
    CHECK(picked[c] == doctest::Approx(feat[2 * 3 + c]));

  Tensor uniform({2, 2, 1}, 0.25);
  Tensor wavg = weighted_avg_pool(feat, uniform);
  Tensor avg = avg_pool_spatial(feat);
  for (std::size_t c = 0; c < 3; ++c)
    CHECK(wavg[c] == doctest::Approx(avg[c]).epsilon(1e-12));

  for (int rep = 0; rep < 5; ++rep) {
    Tensor x = random_tensor({2, 2, 2, 3}, rng);
    Tensor w = random_tensor({2, 2, 2}, rng, 0.0, 1.0);
    auto coeff = random_coeff(3, rng);
    double err = fd_max_rel_error(
        {&x, &w}, [&] { return readout(weighted_avg_pool(x, w), coeff); });
    CHECK(err < 1e-4);
  }
}

TEST_CASE("softmax_grid hand values, shift invariance, gradient") {
  Tensor flat({2, 2, 2}, 0.0);
  Tensor sm = softmax_grid(flat);
  for (std::size_t i = 0; i < 8; ++i)
    CHECK(sm[i] == doctest::Approx(0.125).epsilon(1e-12));

  Tensor two = Tensor::from_values({2}, {0.0, std::log(3.0)});
  Tensor sm2 = softmax_grid(two);
  CHECK(sm2[0] == doctest::Approx(0.25).epsilon(1e-9));
  CHECK(sm2[1] == doctest::Approx(0.75).epsilon(1e-9));

  Rng rng(6);
  Tensor logits = random_tensor({3, 2, 1}, rng, -2.0, 2.0);
  Tensor shifted = Tensor::from_values(logits.dims(), logits.values());
  for (std::size_t i = 0; i < shifted.size(); ++i) shifted[i] += 17.5;
  Tensor s1 = softmax_grid(logits), s2 = softmax_grid(shifted);
  for (std::size_t i = 0; i < s1.size(); ++i)
    CHECK(std::abs(s1[i] - s2[i]) < 1e-12);

  for (int rep = 0; rep < 5; ++rep) {
    Tensor z = random_tensor({2, 2, 1}, rng, -2.0, 2.0);
    auto coeff = random_coeff(4, rng);
    double err = fd_max_rel_error(
        {&z}, [&] { return readout(softmax_grid(z), coeff); });
    CHECK(err < 1e-4);
  }
}

TEST_CASE("softmax_grid and gumbel_softmax sum to one") {
  Rng rng(7);
  for (int rep = 0; rep < 200; ++rep) {
    Tensor z = random_tensor({3, 3, 2}, rng, -5.0, 5.0);
    Tensor sm = softmax_grid(z);
    double s = 0.0;
    for (std::size_t i = 0; i < sm.size(); ++i) s += sm[i];
    CHECK(std::abs(s - 1.0) < 1e-9);

    Tensor g = gumbel_softmax(sm, 2.0, rng);
    s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) s += g[i];
    CHECK(std::abs(s - 1.0) < 1e-9);
  }
}

TEST_CASE("gumbel_softmax degenerate, law, temperature, monotone argmax") {
  Rng rng(8);

  // one-hot distribution keeps its argmax
  Tensor hot = Tensor::from_values({4}, {0.0, 0.0, 1.0, 0.0});
  int hits = 0;
  for (int i = 0; i < 10000; ++i) {
    Tensor s = gumbel_softmax(hot, 2.0, rng);
    std::size_t arg = 0;
    for (std::size_t j = 1; j < 4; ++j)
      if (s[j] > s[arg]) arg = j;
    hits += arg == 2;
  }
  CHECK(hits == 10000);

  // Gumbel-max law: argmax frequency reproduces the categorical probabilities
  Tensor r = Tensor::from_values({2}, {0.3, 0.7});
  int second = 0;
  for (int i = 0; i < 100000; ++i) {
    Tensor s = gumbel_softmax(r, 2.0, rng);
    second += s[1] > s[0];
  }
  CHECK(std::abs(second / 100000.0 - 0.7) < 0.01);

  // high temperature flattens the sample
  Tensor skew = Tensor::from_values({4}, {0.85, 0.05, 0.05, 0.05});
  for (int i = 0; i < 20; ++i) {
    Tensor s = gumbel_softmax(skew, 100.0, rng);
    for (std::size_t j = 0; j < 4; ++j) CHECK(std::abs(s[j] - 0.25) < 0.05);
  }

  // argmax of the sample equals argmax of (log r + G) for every draw
  for (int i = 0; i < 200; ++i) {
    std::vector<double> noise(4);
    for (double& g : noise) g = rng.gumbel();
    Tensor s = gumbel_softmax_with_noise(skew, 2.0, noise);
    std::size_t arg_s = 0, arg_z = 0;
    for (std::size_t j = 1; j < 4; ++j) {
      if (s[j] > s[arg_s]) arg_s = j;
      const double zj = std::log(std::max(skew[j], 1e-12)) + noise[j];
      const double za = std::log(std::max(skew[arg_z], 1e-12)) + noise[arg_z];
      if (zj > za) arg_z = j;
    }
    CHECK(arg_s == arg_z);
  }
}

TEST_CASE("gumbel_softmax gradient flows through r") {
  Rng rng(9);
  for (int rep = 0; rep < 5; ++rep) {
    Tensor z = random_tensor({2, 2, 1}, rng, -1.0, 1.0);
    std::vector<double> noise(4);
    for (double& g : noise) g = rng.gumbel();
    auto coeff = random_coeff(4, rng);
    double err = fd_max_rel_error({&z}, [&] {
      Tensor r = softmax_grid(z);
      return readout(gumbel_softmax_with_noise(r, 2.0, noise), coeff);
    });
    CHECK(err < 1e-4);
  }
}

TEST_CASE("kl_divergence values and gradient") {
  Tensor p = Tensor::from_values({2}, {0.5, 0.5});
  Tensor q = Tensor::from_values({2}, {0.5, 0.5});
  CHECK(std::abs(kl_divergence(p, q).item()) < 1e-12);

  Tensor point = Tensor::from_values({2}, {1.0, 0.0});
  CHECK(kl_divergence(point, q).item() ==
        doctest::Approx(std::log(2.0)).epsilon(1e-9));

  Rng rng(10);
  for (int rep = 0; rep < 50; ++rep) {
    Tensor a = softmax_grid(random_tensor({2, 3, 1}, rng, -2.0, 2.0));
    Tensor b = softmax_grid(random_tensor({2, 3, 1}, rng, -2.0, 2.0));
    CHECK(kl_divergence(a, b).item() >= -1e-9);
  }

  // gradient w.r.t. p's logits
  for (int rep = 0; rep < 5; ++rep) {
    Tensor z = random_tensor({2, 2, 1}, rng, -1.5, 1.5);
    Tensor target = softmax_grid(random_tensor({2, 2, 1}, rng, -1.5, 1.5));
    double err = fd_max_rel_error(
        {&z}, [&] { return kl_divergence(softmax_grid(z), target); });
    CHECK(err < 1e-4);
  }
}

TEST_CASE("cross_entropy values and gradient") {
  Tensor dominant({4}, 0.0);
  dominant[1] = 50.0;
  CHECK(cross_entropy(dominant, 1).item() < 1e-9);

  Tensor uniform({34}, 0.0);
  CHECK(cross_entropy(uniform, 7).item() ==
        doctest::Approx(std::log(34.0)).epsilon(1e-9));
  CHECK_THROWS(cross_entropy(uniform, 34));
  CHECK_THROWS(cross_entropy(uniform, -1));

  Rng rng(11);
  for (int rep = 0; rep < 5; ++rep) {
    Tensor z = random_tensor({6}, rng, -2.0, 2.0);
    double err =
        fd_max_rel_error({&z}, [&] { return cross_entropy(z, rep % 6); });
    CHECK(err < 1e-6);
  }
}

TEST_CASE("sgd_step quadratic convergence") {
  // zero gradients leave parameters unchanged
  Tensor w = Tensor::from_values({3}, {1.0, -2.0, 3.0}, true);
  std::vector<std::vector<double>> vel;
  sgd_step({&w}, vel, 0.1, 0.9);
  CHECK(w[0] == 1.0);
  CHECK(w[1] == -2.0);
  CHECK(w[2] == 3.0);

  // momentum 0: plain gradient descent on f(x) = (x-3)^2 reaches the minimum
  Tensor x = Tensor::from_values({1}, {-5.0}, true);
  vel.clear();
  for (int step = 0; step < 200; ++step) {
    x.grad()[0] = 2.0 * (x[0] - 3.0);
    sgd_step({&x}, vel, 0.1, 0.0);
  }
  CHECK(std::abs(x[0] - 3.0) < 1e-6);

  // momentum 0.9 in the overdamped regime: loss decreases monotonically
  // after burn-in
  Tensor y = Tensor::from_values({1}, {-5.0}, true);
  vel.clear();
  auto loss = [&] { return (y[0] - 3.0) * (y[0] - 3.0); };
  double prev = 0.0;
  for (int step = 0; step < 150; ++step) {
    if (step == 10) prev = loss();
    y.grad()[0] = 2.0 * (y[0] - 3.0);
    sgd_step({&y}, vel, 0.0005, 0.9);
    if (step >= 10) {
      CHECK(loss() <= prev + 1e-12);
      prev = loss();
    }
  }

  CHECK(cosine_lr(0.1, 0, 100) == doctest::Approx(0.1));
  CHECK(cosine_lr(0.1, 50, 100) == doctest::Approx(0.05));
  CHECK(cosine_lr(0.1, 100, 100) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("fixed seed reproducibility") {
  auto run = [] {
    Rng rng(42);
    Tensor z = random_tensor({3, 3, 2}, rng, -1.0, 1.0);
    Tensor r = softmax_grid(z);
    Tensor s = gumbel_softmax(r, 2.0, rng);
    return s.values();
  };
  auto a = run();
  auto b = run();
  CHECK(a == b);  // bitwise
}

TEST_SUITE_END();
