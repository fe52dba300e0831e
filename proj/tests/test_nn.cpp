#include <doctest.h>

#include "rising/nn/adam.hpp"
#include "rising/nn/layers.hpp"
#include "rising/nn/resunet.hpp"
#include "support.hpp"

using namespace rising;
using namespace rising::nn;

namespace {

Tensor4<double> random_tensor(int n, int c, int h, int w, std::uint64_t seed, double lo = -1, double hi = 1) {
  RandomStream rng(seed);
  Tensor4<double> t(n, c, h, w);
  for (Eigen::Index i = 0; i < t.size(); ++i) t.values().data()[i] = rng.uniform(lo, hi);
  return t;
}

Matrix<double> random_matrix(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
  RandomStream rng(seed);
  Matrix<double> m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-1, 1);
  return m;
}

// Scalar probe L = Σ w ⊙ y so that ∂L/∂y = w.
double probe(const Tensor4<double>& y, const Tensor4<double>& w) { return y.values().cwiseProduct(w.values()).sum(); }

}  // namespace

TEST_CASE("1x1 identity convolution returns its input") {
  const auto x = random_tensor(2, 3, 4, 5, 1);
  const Matrix<double> w = Matrix<double>::Identity(3, 3);
  const auto y = conv2d_forward(x, w, Vector<double>(Vector<double>::Zero(3)), {1, 1, 0});
  CHECK(y.values() == x.values());
}

TEST_CASE("3x3 all-ones kernel spreads a one-hot input into a clipped block") {
  Tensor4<double> x(1, 1, 5, 5);
  x.at(0, 0, 2, 2) = 1;
  x.at(0, 0, 0, 4) = 1;  // corner: block clipped by the border
  const auto y = conv2d_forward(x, Matrix<double>(Matrix<double>::Ones(1, 9)), Vector<double>(Vector<double>::Zero(1)), {3, 1, 1});
  for (int r = 0; r < 5; ++r)
    for (int c = 0; c < 5; ++c) {
      const double expect = (std::abs(r - 2) <= 1 && std::abs(c - 2) <= 1 ? 1.0 : 0.0) + (r <= 1 && c >= 3 ? 1.0 : 0.0);
      CHECK(y.at(0, 0, r, c) == expect);
    }
}

TEST_CASE("convolution is linear and reports shape errors by layer name") {
  const auto a = random_tensor(2, 2, 6, 6, 2), b = random_tensor(2, 2, 6, 6, 3);
  const auto w = random_matrix(3, 18, 4);
  const Vector<double> zero = Vector<double>::Zero(3);
  Tensor4<double> s = a;
  s.values() += b.values();
  const auto lhs = conv2d_forward(s, w, zero, {3, 1, 1});
  auto rhs = conv2d_forward(a, w, zero, {3, 1, 1});
  rhs.values() += conv2d_forward(b, w, zero, {3, 1, 1}).values();
  CHECK((lhs.values() - rhs.values()).cwiseAbs().maxCoeff() < 1e-12);
  try {
    conv2d_forward(random_tensor(1, 4, 6, 6, 5), w, zero, {3, 1, 1}, "enc1.conv0");
    FAIL("expected shape error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("enc1.conv0") != std::string::npos);
  }
}

TEST_CASE("single linear layer with MSE: analytic gradient equals the closed form") {
  // A 1×1 convolution on 1×1 images is a dense layer y = W x + b.
  const int batch = 5, in = 4, out = 3;
  const auto x = random_tensor(batch, in, 1, 1, 6);
  const auto t = random_tensor(batch, out, 1, 1, 7);
  const auto w = random_matrix(out, in, 8);
  const Vector<double> b = Vector<double>::Zero(out);
  const auto y = conv2d_forward(x, w, b, {1, 1, 0});
  Matrix<double> dw = Matrix<double>::Zero(out, in);
  Vector<double> db = Vector<double>::Zero(out);
  conv2d_backward(x, w, mse_backward(y, t), {1, 1, 0}, dw, db, static_cast<Tensor4<double>*>(nullptr));
  // Rows of X are samples: ∂/∂W (1/N)Σ‖W x_n − t_n‖² = 2 (W X − T) Xᵀ / N with column samples.
  const Matrix<double> X = x.values(), T = t.values();
  const Matrix<double> closed = 2.0 * (w * X - T) * X.transpose() / batch;
  CHECK((dw - closed).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((db - 2.0 * (w * X - T).rowwise().sum() / batch).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("layer gradients match central differences") {
  const double h = 1e-6;
  SUBCASE("conv2d input and weights") {
    const auto x = random_tensor(2, 2, 5, 4, 10);
    auto w = random_matrix(3, 18, 11);
    Vector<double> b = random_matrix(3, 1, 12);
    const auto probe_w = random_tensor(2, 3, 5, 4, 13);
    Matrix<double> dw = Matrix<double>::Zero(3, 18);
    Vector<double> db = Vector<double>::Zero(3);
    Tensor4<double> dx;
    conv2d_backward(x, w, probe_w, {3, 1, 1}, dw, db, &dx);
    auto loss = [&](const Tensor4<double>& xi, const Matrix<double>& wi, const Vector<double>& bi) {
      return probe(conv2d_forward(xi, wi, bi, {3, 1, 1}), probe_w);
    };
    for (Eigen::Index i = 0; i < w.size(); i += 5) {
      auto wp = w, wm = w;
      wp.data()[i] += h;
      wm.data()[i] -= h;
      CHECK(test_support::rel_diff(dw.data()[i], (loss(x, wp, b) - loss(x, wm, b)) / (2 * h)) < 1e-6);
    }
    for (Eigen::Index i = 0; i < x.size(); i += 3) {
      auto xp = x, xm = x;
      xp.values().data()[i] += h;
      xm.values().data()[i] -= h;
      CHECK(test_support::rel_diff(dx.values().data()[i], (loss(xp, w, b) - loss(xm, w, b)) / (2 * h)) < 1e-6);
    }
    for (Eigen::Index i = 0; i < b.size(); ++i) {
      auto bp = b, bm = b;
      bp[i] += h;
      bm[i] -= h;
      CHECK(test_support::rel_diff(db[i], (loss(x, w, bp) - loss(x, w, bm)) / (2 * h)) < 1e-6);
    }
  }
  SUBCASE("max pooling, upsampling and unit tanh") {
    const auto x = random_tensor(2, 2, 4, 6, 20);
    const auto wp = random_tensor(2, 2, 2, 3, 21);
    std::vector<Eigen::Index> arg;
    maxpool2_forward(x, arg);
    const auto dpool = maxpool2_backward(wp, arg, 4, 6);
    const auto wu = random_tensor(2, 2, 8, 12, 22);
    const auto dup = upsample2_backward(wu);
    const auto wt = random_tensor(2, 2, 4, 6, 23);
    const auto dt = unit_tanh_backward(unit_tanh_forward(x), wt);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      auto xp = x, xm = x;
      xp.values().data()[i] += h;
      xm.values().data()[i] -= h;
      std::vector<Eigen::Index> scratch;
      const double fp = probe(maxpool2_forward(xp, scratch), wp), fm = probe(maxpool2_forward(xm, scratch), wp);
      CHECK(test_support::rel_diff(dpool.values().data()[i] + 1.0, (fp - fm) / (2 * h) + 1.0) < 1e-6);
      CHECK(test_support::rel_diff(dup.values().data()[i],
                                   (probe(upsample2_forward(xp), wu) - probe(upsample2_forward(xm), wu)) / (2 * h)) <
            1e-6);
      CHECK(test_support::rel_diff(dt.values().data()[i],
                                   (probe(unit_tanh_forward(xp), wt) - probe(unit_tanh_forward(xm), wt)) / (2 * h)) <
            1e-6);
    }
  }
}

TEST_CASE("relu passes gradient only where the output is positive") {
  Tensor4<double> y(1, 1, 1, 4);
  y.values() << -1.0, 0.0, 2.0, 3.0;
  relu_inplace(y);
  Tensor4<double> dy(1, 1, 1, 4);
  dy.values().setOnes();
  relu_backward_inplace(y, dy);
  CHECK(dy.values()(0, 0) == 0.0);
  CHECK(dy.values()(0, 1) == 0.0);
  CHECK(dy.values()(0, 2) == 1.0);
}

TEST_CASE("max pooling rejects odd inputs") {
  std::vector<Eigen::Index> arg;
  CHECK_THROWS_AS(maxpool2_forward(random_tensor(1, 1, 5, 4, 1), arg), Error);
}

TEST_CASE("parameter count follows the layer formula") {
  // Independent count for levels=1, base=2, two convs per level, 3×3 kernels:
  // enc0: 1→2, 2→2; bottleneck: 2→4, 4→4; dec0.up: 4→2; dec0: 2→2, 2→2; output 2→1 (1×1).
  const auto conv = [](int in, int out, int k) { return out * in * k * k + out; };
  const std::size_t expect = conv(1, 2, 3) + conv(2, 2, 3) + conv(2, 4, 3) + conv(4, 4, 3) + conv(4, 2, 3) +
                             conv(2, 2, 3) + conv(2, 2, 3) + conv(2, 1, 1);
  NetworkSpec spec{1, 2, 2, 3};
  CHECK(parameter_count(spec) == expect);
  CHECK(NetworkParams<float>::initialize(spec, 1).size() == expect);
  CHECK(parameter_count(NetworkSpec{}) == NetworkParams<float>::initialize(NetworkSpec{}, 0).size());
}

TEST_CASE("network spec validation and JSON round-trip") {
  NetworkSpec spec{2, 4, 1, 3};
  CHECK(network_spec_from_json(to_json(spec)) == spec);
  CHECK_THROWS_AS((NetworkSpec{0, 4, 1, 3}.validate()), Error);
  CHECK_THROWS_AS((NetworkSpec{2, 4, 1, 4}.validate()), Error);
}

TEST_CASE("network output lies in [0, 1]; identical inputs give identical outputs") {
  const NetworkSpec spec{2, 4, 2, 3};
  ResUNet<float> net(NetworkParams<float>::initialize(spec, 3));
  Tensor4<float> x(3, 1, 8, 8);
  const auto one = random_tensor(1, 1, 8, 8, 4, 0, 1).cast<float>();
  for (int n = 0; n < 3; ++n) x.plane(n, 0) = one.plane(0, 0);
  const auto y = net.infer(x);
  CHECK(y.values().minCoeff() >= 0.0f);
  CHECK(y.values().maxCoeff() <= 1.0f);
  CHECK(y.plane(0, 0) == y.plane(1, 0));
  CHECK(y.plane(0, 0) == y.plane(2, 0));
  CHECK(net.infer(x).values() == y.values());
  CHECK_THROWS_AS(net.infer(Tensor4<float>(1, 1, 6, 8)), Error);
}

TEST_CASE("zero output layer with the global residual passes the input through") {
  const NetworkSpec spec{2, 4, 2, 3};
  auto params = NetworkParams<double>::initialize(spec, 5);
  params.convs.back().weight.setZero();
  params.convs.back().bias.setZero();
  ResUNet<double> net(params);
  auto x = random_tensor(2, 1, 8, 8, 6, 0.01, 0.99);
  const auto y = net.infer(x);
  CHECK((y.values() - x.values()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("backward requires a matching forward") {
  const NetworkSpec spec{1, 2, 1, 3};
  ResUNet<double> net(NetworkParams<double>::initialize(spec, 1));
  auto grads = net.params().zeros_like();
  Tensor4<double> dy(1, 1, 4, 4);
  CHECK_THROWS_AS(net.backward(dy, grads), Error);
  net.forward(random_tensor(1, 1, 4, 4, 2, 0, 1));
  CHECK_NOTHROW(net.backward(dy, grads));
  CHECK_THROWS_AS(net.backward(dy, grads), Error);
}

TEST_CASE("fresh parameters have a zero output layer") {
  const auto p = NetworkParams<double>::initialize(NetworkSpec{2, 4, 2, 3}, 7);
  CHECK(p.convs.back().weight.isZero(0));
  CHECK(p.convs.back().bias.isZero(0));
  CHECK(p.convs.front().weight.cwiseAbs().maxCoeff() > 0);
  ResUNet<double> net(p);
  const auto x = random_tensor(1, 1, 8, 8, 3, 0.01, 0.99);
  CHECK((net.infer(x).values() - x.values()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("sampled network parameter gradients match central differences in double precision") {
  const NetworkSpec spec{2, 4, 2, 3};
  auto init = NetworkParams<double>::initialize(spec, 7);
  const auto out = random_tensor(1, 1, 1, init.convs.back().weight.size(), 10, -0.5, 0.5);
  init.convs.back().weight = Eigen::Map<const Matrix<double>>(out.values().data(), init.convs.back().weight.rows(),
                                                               init.convs.back().weight.cols());
  ResUNet<double> net(init);
  const auto x = random_tensor(2, 1, 8, 8, 8, 0.05, 0.95);
  const auto t = random_tensor(2, 1, 8, 8, 9, 0, 1);
  auto grads = net.params().zeros_like();
  Tensor4<double> dx;
  net.backward(mse_backward(net.forward(x), t), grads, &dx);
  const auto analytic = grads.flatten();
  auto flat = net.params().flatten();
  const double h = 1e-6;
  auto loss_at = [&](std::size_t i, double v) {
    auto p = flat;
    p[i] = v;
    auto params = net.params();
    params.unflatten(p);
    return mse_forward(ResUNet<double>(params).infer(x), t);
  };
  int checked = 0;
  for (std::size_t i = 0; i < flat.size(); i += 37, ++checked) {
    const double fd = (loss_at(i, flat[i] + h) - loss_at(i, flat[i] - h)) / (2 * h);
    CHECK(std::abs(analytic[i] - fd) <= 1e-6 * std::max(1.0, std::abs(fd)));
  }
  CHECK(checked > 50);
  for (Eigen::Index i = 0; i < x.size(); i += 9) {
    auto xp = x, xm = x;
    xp.values().data()[i] += h;
    xm.values().data()[i] -= h;
    const double fd = (mse_forward(net.infer(xp), t) - mse_forward(net.infer(xm), t)) / (2 * h);
    CHECK(std::abs(dx.values().data()[i] - fd) <= 1e-6 * std::max(1.0, std::abs(fd)));
  }
}

TEST_CASE("Adam: single step from zero state, clipping and learning-rate schedule") {
  TrainConfig cfg;
  NetworkSpec spec{1, 1, 1, 1};
  auto params = NetworkParams<double>::initialize(spec, 1);
  const auto before = params.flatten();
  auto grads = params.zeros_like();
  for (auto& c : grads.convs) {
    c.weight.setConstant(1e-3);
    c.bias.setConstant(1e-3);
  }
  auto state = AdamState<double>::zeros_like(params);
  adam_step(params, grads, state, 1, 1e-3, cfg);
  // Hand-computed: m̂ = g, v̂ = g², update = −lr·g/(|g| + ε).
  const double expect = -1e-3 * 1e-3 / (1e-3 + 1e-8);
  const auto after = params.flatten();
  for (std::size_t i = 0; i < after.size(); ++i) CHECK(after[i] - before[i] == doctest::Approx(expect).epsilon(1e-9));

  // Clipping: norm 50 → scaled by exactly 0.1.
  auto g = params.zeros_like();
  g.convs[0].weight(0, 0) = 30;
  g.convs[1].weight(0, 0) = 40;
  CHECK(global_norm(g) == 50.0);
  CHECK(clip_global_norm(g, 5.0) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(g.convs[0].weight(0, 0) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(g.convs[1].weight(0, 0) == doctest::Approx(4.0).epsilon(1e-15));

  CHECK(learning_rate(cfg, 0, 1000) == 1e-3);
  CHECK(learning_rate(cfg, 1000, 1000) == 1e-5);
  CHECK(learning_rate(cfg, 500, 1000) == doctest::Approx(0.5 * (1e-3 + 1e-5)));
}

TEST_CASE("Adam update is unchanged by clipping when the gradient is within the bound") {
  TrainConfig loose, tight;
  loose.grad_clip = 1e9;
  tight.grad_clip = 5.0;
  auto p1 = NetworkParams<float>::initialize(NetworkSpec{1, 2, 1, 3}, 2);
  auto p2 = p1;
  auto g1 = p1.zeros_like();
  RandomStream rng(3);
  for (auto& c : g1.convs)
    for (Eigen::Index i = 0; i < c.weight.size(); ++i) c.weight.data()[i] = static_cast<float>(rng.uniform(-0.1, 0.1));
  REQUIRE(global_norm(g1) < 5.0);
  auto g2 = g1;
  auto s1 = AdamState<float>::zeros_like(p1), s2 = s1;
  adam_step(p1, g1, s1, 1, 1e-3, loose);
  adam_step(p2, g2, s2, 1, 1e-3, tight);
  CHECK(p1.flatten() == p2.flatten());
}

TEST_CASE("Adam names the layer holding a non-finite gradient") {
  auto p = NetworkParams<float>::initialize(NetworkSpec{1, 2, 1, 3}, 2);
  auto g = p.zeros_like();
  g.convs[2].bias[0] = std::numeric_limits<float>::infinity();
  auto s = AdamState<float>::zeros_like(p);
  try {
    adam_step(p, g, s, 1, 1e-3, TrainConfig{});
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find(p.layout[2].name) != std::string::npos);
  }
  CHECK_THROWS_AS(adam_step(p, g, s, 0, 1e-3, TrainConfig{}), Error);
}
