#include <catch2/catch_amalgamated.hpp>

#include "acts/network.hpp"
#include "test_helpers.hpp"

using namespace acts;
using namespace testutil;
using Catch::Approx;

namespace {

// Independent straight-line forward pass for a 2-8-3 ReLU/identity net,
// written before the engine and kept free of the library's linalg helpers.
Vec oracle_forward_283(const Mat& w1, const Vec& b1, const Mat& w2, const Vec& b2,
                       const Vec& mean, const Vec& std_dev, ScoreTransform st, const Vec& x) {
  double h[8];
  for (int u = 0; u < 8; ++u) {
    double z = b1[static_cast<std::size_t>(u)];
    for (int i = 0; i < 2; ++i)
      z += w1.data[static_cast<std::size_t>(u * 2 + i)] *
           ((x[static_cast<std::size_t>(i)] - mean[static_cast<std::size_t>(i)]) /
            std_dev[static_cast<std::size_t>(i)]);
    h[u] = z > 0.0 ? z : 0.0;
  }
  double z2[3];
  for (int j = 0; j < 3; ++j) {
    double z = b2[static_cast<std::size_t>(j)];
    for (int u = 0; u < 8; ++u) z += w2.data[static_cast<std::size_t>(j * 8 + u)] * h[u];
    z2[j] = z;
  }
  Vec y(3);
  if (st == ScoreTransform::NegLogit) {
    for (int j = 0; j < 3; ++j) y[static_cast<std::size_t>(j)] = -z2[j];
  } else {
    double m = std::max(z2[0], std::max(z2[1], z2[2]));
    double lse = m + std::log(std::exp(z2[0] - m) + std::exp(z2[1] - m) + std::exp(z2[2] - m));
    for (int j = 0; j < 3; ++j) y[static_cast<std::size_t>(j)] = lse - z2[j];
  }
  return y;
}

Network random_283(std::mt19937_64& gen, ScoreTransform st, Normalization norm) {
  Mat w1(8, 2), w2(3, 8);
  for (double& v : w1.data) v = rng::uniform(gen, -1.0, 1.0);
  for (double& v : w2.data) v = rng::uniform(gen, -1.0, 1.0);
  Vec b1 = random_vec(gen, 8, -0.5, 0.5);
  Vec b2 = random_vec(gen, 3, -0.5, 0.5);
  std::vector<DenseLayer> layers;
  layers.push_back(DenseLayer{w1, b1, Activation::ReLU});
  layers.push_back(DenseLayer{w2, b2, Activation::Identity});
  return Network(std::move(layers), std::move(norm), st);
}

}  // namespace

TEST_CASE("forward: identity network negated by the score transform") {
  Network net = affine_net(make_mat(2, 2, {1, 0, 0, 1}), {0, 0}, identity_norm(2));
  Vec y = net.forward({0.3, 0.8});
  CHECK(y[0] == -0.3);
  CHECK(y[1] == -0.8);
}

TEST_CASE("forward: deterministic, bitwise-identical outputs") {
  std::mt19937_64 gen(7);
  Network net = random_net(gen, 4, 3, 2);
  Vec x = random_vec(gen, 4, 0.0, 1.0);
  Vec y1 = net.forward(x);
  Vec y2 = net.forward(x);
  REQUIRE(y1.size() == y2.size());
  for (std::size_t i = 0; i < y1.size(); ++i) CHECK(y1[i] == y2[i]);
}

TEST_CASE("forward: matches the independent straight-line oracle on 2-8-3 nets") {
  std::mt19937_64 gen(11);
  for (int rep = 0; rep < 20; ++rep) {
    ScoreTransform st = rep % 2 == 0 ? ScoreTransform::NegLogit : ScoreTransform::NegLogSoftmax;
    Normalization norm{random_vec(gen, 2, -0.2, 0.2), random_vec(gen, 2, 0.5, 1.5)};
    Network net = random_283(gen, st, norm);
    Vec x = random_vec(gen, 2, 0.0, 1.0);
    Vec expect = oracle_forward_283(net.layers()[0].weights, net.layers()[0].bias,
                                    net.layers()[1].weights, net.layers()[1].bias, norm.mean,
                                    norm.std, st, x);
    Vec got = net.forward(x);
    for (std::size_t j = 0; j < 3; ++j)
      CHECK(got[j] == Approx(expect[j]).epsilon(1e-12).margin(1e-14));
  }
}

TEST_CASE("forward: rejects dimension mismatch and non-finite input") {
  Network net = affine_net(make_mat(2, 2, {1, 0, 0, 1}), {0, 0}, identity_norm(2));
  CHECK_THROWS_AS(net.forward({0.1}), ValidationError);
  CHECK_THROWS_AS(net.forward({0.1, std::nan("")}), ValidationError);
}

TEST_CASE("classify: argmin with lowest-index tie break") {
  // Zero weights, so the scores are just the negated biases.
  Network net = affine_net(make_mat(2, 1, {0, 0}), {-0.2, -0.9}, identity_norm(1));
  CHECK(net.forward({0.5})[0] == Approx(0.2));
  CHECK(net.classify({0.5}) == 0);  // y = (0.2, 0.9)

  Network tie = affine_net(make_mat(2, 1, {0, 0}), {-0.5, -0.5}, identity_norm(1));
  CHECK(tie.classify({0.3}) == 0);
}

TEST_CASE("classify: agrees with the argmin of the forward oracle") {
  std::mt19937_64 gen(13);
  for (int rep = 0; rep < 20; ++rep) {
    Normalization norm = identity_norm(2);
    Network net = random_283(gen, ScoreTransform::NegLogit, norm);
    Vec x = random_vec(gen, 2, 0.0, 1.0);
    Vec y = oracle_forward_283(net.layers()[0].weights, net.layers()[0].bias,
                               net.layers()[1].weights, net.layers()[1].bias, norm.mean,
                               norm.std, ScoreTransform::NegLogit, x);
    int expect = 0;
    for (int j = 1; j < 3; ++j)
      if (y[static_cast<std::size_t>(j)] < y[static_cast<std::size_t>(expect)]) expect = j;
    CHECK(net.classify(x) == expect);
  }
}

TEST_CASE("classify: invariant under shared shift and positive scaling of scores") {
  std::mt19937_64 gen(17);
  for (int rep = 0; rep < 20; ++rep) {
    Network net = random_net(gen, 3, 4, 2);
    Vec x = random_vec(gen, 3, 0.0, 1.0);
    Vec y = net.forward(x);
    int t = net.classify(x);
    double scale = rng::uniform(gen, 0.1, 5.0);
    double shift = rng::uniform(gen, -3.0, 3.0);
    Vec adjusted(y.size());
    for (std::size_t j = 0; j < y.size(); ++j) adjusted[j] = scale * y[j] + shift;
    int t2 = static_cast<int>(std::min_element(adjusted.begin(), adjusted.end()) -
                              adjusted.begin());
    CHECK(t2 == t);
  }
}

TEST_CASE("input_jacobian: affine networks give the constant weight-product Jacobian") {
  // Two identity layers; with NegLogit and normalization std the DJM is
  // -(W2 W1) scaled columnwise by 1/std, independent of x.
  Mat w1 = make_mat(3, 2, {0.5, -1.0, 2.0, 0.25, -0.75, 1.5});
  Mat w2 = make_mat(2, 3, {1.0, 0.5, -0.5, -2.0, 1.0, 0.0});
  Normalization norm{{0.1, -0.3}, {0.8, 1.25}};
  std::vector<DenseLayer> layers;
  layers.push_back(DenseLayer{w1, {0.1, 0.2, 0.3}, Activation::Identity});
  layers.push_back(DenseLayer{w2, {-0.1, 0.4}, Activation::Identity});
  Network net(layers, norm, ScoreTransform::NegLogit);

  Mat expect(2, 2);
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t c = 0; c < 2; ++c) {
      double acc = 0.0;
      for (std::size_t k = 0; k < 3; ++k) acc += w2(r, k) * w1(k, c);
      expect(r, c) = -acc / norm.std[c];
    }

  Djm at_a = net.input_jacobian({0.2, 0.9});
  Djm at_b = net.input_jacobian({0.7, 0.1});
  for (std::size_t i = 0; i < expect.data.size(); ++i) {
    CHECK(at_a.data[i] == Approx(expect.data[i]).epsilon(1e-14));
    CHECK(at_a.data[i] == at_b.data[i]);
  }
}

TEST_CASE("input_jacobian: inactive ReLU unit contributes nothing") {
  // Hidden unit 1 has a large negative bias, so it is off at the probe
  // point; rewiring its incoming weights must not change the Jacobian.
  Mat w1 = make_mat(2, 2, {1.0, 0.5, 0.25, -0.5});
  Mat w2 = make_mat(2, 2, {1.0, 3.0, -1.0, 4.0});
  std::vector<DenseLayer> layers;
  layers.push_back(DenseLayer{w1, {0.0, -50.0}, Activation::ReLU});
  layers.push_back(DenseLayer{w2, {0.0, 0.0}, Activation::Identity});
  Network net(layers, identity_norm(2), ScoreTransform::NegLogit);
  Vec x{0.6, 0.4};
  Djm jac = net.input_jacobian(x);

  // Only unit 0 is active: row j = -w2(j,0) * w1(0,:).
  for (std::size_t j = 0; j < 2; ++j)
    for (std::size_t i = 0; i < 2; ++i)
      CHECK(jac(j, i) == Approx(-w2(j, 0) * w1(0, i)).epsilon(1e-14));

  layers[0].weights = make_mat(2, 2, {1.0, 0.5, 9.0, 9.0});
  Network rewired(layers, identity_norm(2), ScoreTransform::NegLogit);
  Djm jac2 = rewired.input_jacobian(x);
  for (std::size_t i = 0; i < jac.data.size(); ++i) CHECK(jac2.data[i] == jac.data[i]);
}

TEST_CASE("input_jacobian: matches central finite differences on random nets") {
  std::mt19937_64 gen(23);
  for (int rep = 0; rep < 25; ++rep) {
    Network net = random_net(gen, 2 + gen() % 7, 2 + gen() % 3, 1 + gen() % 3);
    Vec x = sample_interior_point(net, gen);
    Djm jac = net.input_jacobian(x);
    REQUIRE(jac.rows == net.num_classes());
    REQUIRE(jac.cols == net.num_inputs());
    Mat fd = fd_jacobian(net, x);
    CHECK(max_mismatch(jac, fd, 1e-5, 1e-8) <= 1.0);
  }
}

TEST_CASE("input_jacobian: affine exactness, D(x+dx) - D(x) == Djm dx") {
  std::mt19937_64 gen(29);
  for (int rep = 0; rep < 10; ++rep) {
    Mat w(3, 4);
    for (double& v : w.data) v = rng::uniform(gen, -2.0, 2.0);
    Network net = affine_net(std::move(w), random_vec(gen, 3, -1.0, 1.0),
                             Normalization{random_vec(gen, 4, -0.5, 0.5),
                                           random_vec(gen, 4, 0.5, 2.0)});
    Vec x = random_vec(gen, 4, 0.0, 1.0);
    Vec dx = random_vec(gen, 4, -0.25, 0.25);
    Vec xp(4);
    for (std::size_t i = 0; i < 4; ++i) xp[i] = x[i] + dx[i];
    Vec y0 = net.forward(x);
    Vec y1 = net.forward(xp);
    Djm jac = net.input_jacobian(x);
    for (std::size_t j = 0; j < 3; ++j) {
      double predicted = 0.0;
      for (std::size_t i = 0; i < 4; ++i) predicted += jac(j, i) * dx[i];
      CHECK(y1[j] - y0[j] == Approx(predicted).epsilon(1e-11).margin(1e-12));
    }
  }
}

TEST_CASE("loss_gradient: uniform logits reduce to the Jacobian-weighted 1/K rule") {
  // Rows with matching biases but distinct weights, tuned so the logits all
  // agree at the probe point: z_j = w_j (x - 0.5), x = 0.5.
  Mat w = make_mat(3, 2, {1.0, 2.0, -0.5, 1.5, 2.0, -1.0});
  Network net = affine_net(w, {0.0, 0.0, 0.0},
                           Normalization{{0.5, 0.5}, {1.0, 1.0}});
  Vec x{0.5, 0.5};
  int t = 1;
  Vec g = net.loss_gradient(x, t);
  // Expected: sum_j (1/3 - [j==t]) * d z_j / d x  (softmax is exactly 1/K).
  for (std::size_t i = 0; i < 2; ++i) {
    double expect = 0.0;
    for (std::size_t j = 0; j < 3; ++j)
      expect += ((1.0 / 3.0) - (static_cast<int>(j) == t ? 1.0 : 0.0)) * w(j, i);
    CHECK(g[i] == Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("loss_gradient: closed form on an affine 1-D 2-class net") {
  // z_i = w_i (x - m)/s + b_i; dL/dx = sum_i (softmax_i - [i==t]) w_i / s.
  const double w1 = 1.5, w2 = -0.5, b1 = 0.1, b2 = -0.2, m = 0.25, s = 0.8;
  Network net = affine_net(make_mat(2, 1, {w1, w2}), {b1, b2}, Normalization{{m}, {s}});
  const double x = 0.6;
  const double z1 = w1 * (x - m) / s + b1;
  const double z2 = w2 * (x - m) / s + b2;
  const double p1 = std::exp(z1) / (std::exp(z1) + std::exp(z2));
  const double p2 = 1.0 - p1;
  for (int t = 0; t < 2; ++t) {
    double expect = ((p1 - (t == 0 ? 1.0 : 0.0)) * w1 + (p2 - (t == 1 ? 1.0 : 0.0)) * w2) / s;
    Vec g = net.loss_gradient({x}, t);
    CHECK(g[0] == Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("loss_gradient: matches finite differences on random nets") {
  std::mt19937_64 gen(31);
  for (int rep = 0; rep < 20; ++rep) {
    Network net = random_net(gen, 2 + gen() % 5, 2 + gen() % 4, 1 + gen() % 3);
    Vec x = sample_interior_point(net, gen);
    int label = static_cast<int>(gen() % net.num_classes());
    Vec g = net.loss_gradient(x, label);
    Vec fd = fd_loss_gradient(net, x, label);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(close(g[i], fd[i], 1e-5, 1e-8));
  }
}

TEST_CASE("loss_gradient: rejects an out-of-range label") {
  Network net = affine_net(make_mat(2, 2, {1, 0, 0, 1}), {0, 0}, identity_norm(2));
  CHECK_THROWS_AS(net.loss_gradient({0.1, 0.2}, 2), ValidationError);
  CHECK_THROWS_AS(net.loss_gradient({0.1, 0.2}, -1), ValidationError);
}

TEST_CASE("network construction: validates the dimension chain and std") {
  std::vector<DenseLayer> layers;
  layers.push_back(DenseLayer{make_mat(3, 2, {1, 0, 0, 1, 1, 1}), {0, 0, 0}, Activation::ReLU});
  layers.push_back(DenseLayer{make_mat(2, 4, {1, 0, 0, 1, 1, 1, 0, 0}), {0, 0}, Activation::Identity});
  CHECK_THROWS_AS(Network(layers, identity_norm(2), ScoreTransform::NegLogit), ValidationError);

  Normalization bad_std{{0.0, 0.0}, {1.0, 0.0}};
  CHECK_THROWS_AS(affine_net(make_mat(2, 2, {1, 0, 0, 1}), {0, 0}, bad_std), ValidationError);
}
