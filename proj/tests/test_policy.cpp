#include <catch2/catch_amalgamated.hpp>

#include "vicsim/policy.hpp"

using namespace vicsim;

namespace {

// Independent straight-line evaluator used as an oracle for Mlp::forward.
VecX naive_forward(const Mlp& net, const VecX& z) {
  std::vector<double> a(z.data(), z.data() + z.size());
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    const MatX& w = net.weights[l];
    std::vector<double> out(static_cast<std::size_t>(w.rows()), 0.0);
    for (int i = 0; i < w.rows(); ++i) {
      double acc = net.biases[l](i);
      for (int j = 0; j < w.cols(); ++j) acc += w(i, j) * a[size_t(j)];
      out[size_t(i)] = acc;
    }
    if (l + 1 < net.weights.size())
      for (double& v : out) v = v > 0.0 ? v : net.leaky_slope * v;
    a = out;
  }
  VecX y(long(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    y(long(i)) = net.head == Mlp::Head::Sigmoid ? 1.0 / (1.0 + std::exp(-a[i])) : a[i];
  }
  return y;
}

}  // namespace

TEST_CASE("all-zero network outputs 0.5 through the sigmoid head") {
  Rng rng(1);
  Mlp net = Mlp::make({6, 32, 32, 32, 2}, Mlp::Head::Sigmoid, rng);
  for (auto& w : net.weights) w.setZero();
  for (auto& b : net.biases) b.setZero();
  VecX z(6);
  z << 1, -2, 3, 0.5, -0.1, 2;
  const VecX y = net.forward1(z);
  CHECK((y - VecX::Constant(2, 0.5)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("leaky ReLU slope on a negative hidden pre-activation") {
  Rng rng(1);
  Mlp net = Mlp::make({1, 1, 1}, Mlp::Head::Linear, rng);
  net.weights[0](0, 0) = -1.0;
  net.biases[0](0) = 0.0;
  net.weights[1](0, 0) = 1.0;
  net.biases[1](0) = 0.0;
  VecX z(1);
  z << 1.0;  // hidden pre-activation -1 -> leaky output -0.01
  CHECK(net.forward1(z)(0) == Catch::Approx(-0.01).margin(1e-15));
}

TEST_CASE("forward matches the independent naive evaluator") {
  Rng rng(42);
  std::normal_distribution<double> n01(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const auto head = trial % 2 == 0 ? Mlp::Head::Sigmoid : Mlp::Head::Linear;
    Mlp net = Mlp::make({5, 32, 32, 32, 3}, head, rng);
    VecX z(5);
    for (int i = 0; i < 5; ++i) z(i) = 3.0 * n01(rng);
    REQUIRE((net.forward1(z) - naive_forward(net, z)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("batched forward equals per-row forward") {
  Rng rng(9);
  std::normal_distribution<double> n01(0.0, 1.0);
  Mlp net = Mlp::make({4, 32, 32, 32, 2}, Mlp::Head::Sigmoid, rng);
  MatX X(7, 4);
  for (int i = 0; i < X.size(); ++i) X(i / 4, i % 4) = n01(rng);
  const MatX Y = net.forward(X);
  for (int r = 0; r < 7; ++r)
    REQUIRE((Y.row(r).transpose() - net.forward1(X.row(r).transpose())).cwiseAbs().maxCoeff() <
            1e-14);
}

TEST_CASE("output stays bounded and finite even for extreme inputs") {
  Rng rng(5);
  Mlp net = Mlp::make({3, 32, 32, 32, 2}, Mlp::Head::Sigmoid, rng);
  for (double scale : {1.0, 1e3, 1e6, -1e6}) {
    VecX z = VecX::Constant(3, scale);
    const VecX y = net.forward1(z);
    for (int i = 0; i < y.size(); ++i) {
      REQUIRE(y(i) >= 0.0);
      REQUIRE(y(i) <= 1.0);  // sigmoid saturates to the closed bounds in double
      REQUIRE(std::isfinite(y(i)));
    }
  }
  // At moderate scales the output is strictly interior.
  for (double scale : {-10.0, -1.0, 0.0, 1.0, 10.0}) {
    const VecX y = net.forward1(VecX::Constant(3, scale));
    for (int i = 0; i < y.size(); ++i) {
      REQUIRE(y(i) > 0.0);
      REQUIRE(y(i) < 1.0);
    }
  }
}

TEST_CASE("parameter count formula") {
  Rng rng(2);
  const Mlp net = Mlp::make({6, 32, 32, 32, 2}, Mlp::Head::Sigmoid, rng, true);
  const int expect = (6 + 1) * 32 + (32 + 1) * 32 + (32 + 1) * 32 + (32 + 1) * 2 + 2;
  CHECK(net.param_count() == expect);
  CHECK(net.get_params().size() == expect);
  const Mlp no_std = Mlp::make({6, 32, 32, 32, 2}, Mlp::Head::Sigmoid, rng, false);
  CHECK(no_std.param_count() == expect - 2);
}

TEST_CASE("get/set parameter round trip preserves outputs") {
  Rng rng(3);
  std::normal_distribution<double> n01(0.0, 1.0);
  Mlp a = Mlp::make({4, 32, 32, 32, 2}, Mlp::Head::Sigmoid, rng, true);
  Mlp b = Mlp::make({4, 32, 32, 32, 2}, Mlp::Head::Sigmoid, rng, true);
  b.set_params(a.get_params());
  VecX z(4);
  for (int i = 0; i < 4; ++i) z(i) = n01(rng);
  CHECK((a.forward1(z) - b.forward1(z)).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(b.set_params(VecX::Zero(3)), std::invalid_argument);
}

TEST_CASE("zero upstream gradient yields zero parameter gradients") {
  Rng rng(4);
  Mlp net = Mlp::make({3, 8, 2}, Mlp::Head::Sigmoid, rng, true);
  Mlp::Cache cache;
  MatX X = MatX::Random(5, 3);
  net.forward(X, &cache, true);
  Mlp::Grads g = Mlp::Grads::zeros_like(net);
  net.backward(cache, MatX::Zero(5, 2), true, g);
  CHECK(Mlp::flatten_grads(net, g).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("scalar network gradient matches the hand chain rule") {
  Rng rng(6);
  Mlp net = Mlp::make({1, 1}, Mlp::Head::Sigmoid, rng);
  net.weights[0](0, 0) = 0.7;
  net.biases[0](0) = -0.2;
  const double x = 1.3;
  VecX z(1);
  z << x;
  Mlp::Cache cache;
  const double y = net.forward(z.transpose(), &cache, true)(0, 0);
  Mlp::Grads g = Mlp::Grads::zeros_like(net);
  net.backward(cache, MatX::Ones(1, 1), true, g);
  const double dy = y * (1.0 - y);  // sigmoid'
  CHECK(g.d_weights[0](0, 0) == Catch::Approx(dy * x).margin(1e-14));
  CHECK(g.d_biases[0](0) == Catch::Approx(dy).margin(1e-14));
}

TEST_CASE("gradients match central finite differences") {
  Rng rng(8);
  std::normal_distribution<double> n01(0.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    Mlp net = Mlp::make({4, 8, 6, 3}, trial % 2 == 0 ? Mlp::Head::Sigmoid : Mlp::Head::Linear,
                        rng, false);
    MatX X(3, 4);
    for (int i = 0; i < X.size(); ++i) X(i % 3, i / 3) = n01(rng);
    MatX up(3, 3);
    for (int i = 0; i < up.size(); ++i) up(i % 3, i / 3) = n01(rng);

    Mlp::Cache cache;
    net.forward(X, &cache, true);
    Mlp::Grads g = Mlp::Grads::zeros_like(net);
    net.backward(cache, up, true, g);
    const VecX grad = Mlp::flatten_grads(net, g);

    auto loss = [&](const Mlp& m) { return (m.forward(X).cwiseProduct(up)).sum(); };
    const VecX p0 = net.get_params();
    const double h = 1e-5;
    for (int i = 0; i < p0.size(); i += 7) {  // sample every 7th parameter
      VecX p = p0;
      p(i) = p0(i) + h;
      net.set_params(p);
      const double lp = loss(net);
      p(i) = p0(i) - h;
      net.set_params(p);
      const double lm = loss(net);
      const double fd = (lp - lm) / (2.0 * h);
      const double denom = std::max({std::abs(fd), std::abs(grad(i)), 1e-8});
      REQUIRE(std::abs(fd - grad(i)) / denom < 1e-4);
    }
    net.set_params(p0);
  }
}

TEST_CASE("forward is bit-deterministic") {
  Rng rng1(77), rng2(77);
  Mlp a = Mlp::make({6, 32, 32, 32, 2}, Mlp::Head::Sigmoid, rng1);
  Mlp b = Mlp::make({6, 32, 32, 32, 2}, Mlp::Head::Sigmoid, rng2);
  VecX z = VecX::LinSpaced(6, -1.0, 1.0);
  CHECK((a.forward1(z) - b.forward1(z)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("Adam reduces a quadratic loss") {
  Rng rng(10);
  Mlp net = Mlp::make({2, 8, 1}, Mlp::Head::Linear, rng);
  Adam opt(1e-2);
  MatX X(4, 2);
  X << 0, 0, 0, 1, 1, 0, 1, 1;
  MatX y(4, 1);
  y << 0.1, 0.7, 0.7, 0.2;
  auto mse = [&] { return (net.forward(X) - y).squaredNorm() / 4.0; };
  const double before = mse();
  for (int it = 0; it < 500; ++it) {
    Mlp::Cache cache;
    const MatX pred = net.forward(X, &cache, true);
    Mlp::Grads g = Mlp::Grads::zeros_like(net);
    net.backward(cache, (pred - y) * (2.0 / 4.0), true, g);
    opt.step(net, g);
  }
  CHECK(mse() < 0.05 * before);
}

TEST_CASE("normalizer statistics and round trip") {
  Normalizer n(2);
  Rng rng(12);
  std::normal_distribution<double> d0(3.0, 2.0), d1(-1.0, 0.5);
  for (int i = 0; i < 20000; ++i) {
    VecX x(2);
    x << d0(rng), d1(rng);
    n.observe(x);
  }
  n.freeze();
  CHECK(n.mean()(0) == Catch::Approx(3.0).margin(0.1));
  CHECK(n.stddev()(0) == Catch::Approx(2.0).epsilon(0.05));
  CHECK(n.stddev()(1) == Catch::Approx(0.5).epsilon(0.05));

  VecX x(2);
  x << 5.0, -1.0;
  const VecX z = n.apply(x);
  CHECK(z(0) == Catch::Approx((5.0 - n.mean()(0)) / n.stddev()(0)).margin(1e-12));

  Normalizer m(2);
  m.set(n.mean(), n.stddev(), n.count());
  CHECK((m.apply(x) - n.apply(x)).cwiseAbs().maxCoeff() < 1e-9);

  // Frozen normalizers ignore further observations.
  const VecX mean_before = n.mean();
  n.observe(VecX::Constant(2, 100.0));
  CHECK((n.mean() - mean_before).norm() == 0.0);
}
