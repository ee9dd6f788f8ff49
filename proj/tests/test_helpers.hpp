#pragma once

// Shared fixtures and independent oracles for the test suites. Oracles here
// deliberately avoid the library's linear-algebra helpers so they stay an
// independent check on the implementation path.

#include <random>
#include <vector>

#include "acts/acts.hpp"

namespace testutil {

using acts::Activation;
using acts::DenseLayer;
using acts::Mat;
using acts::Network;
using acts::Normalization;
using acts::ScoreTransform;
using acts::Vec;

inline Mat make_mat(std::size_t rows, std::size_t cols, std::initializer_list<double> vals) {
  Mat m(rows, cols);
  std::size_t i = 0;
  for (double v : vals) m.data[i++] = v;
  return m;
}

inline Normalization identity_norm(std::size_t m) {
  return Normalization{Vec(m, 0.0), Vec(m, 1.0)};
}

/// Single identity layer so that with NegLogit the scores are
/// y = -(W (x - mean)/std + b).
inline Network affine_net(Mat weights, Vec bias, Normalization norm,
                          ScoreTransform st = ScoreTransform::NegLogit) {
  std::vector<DenseLayer> layers;
  layers.push_back(DenseLayer{std::move(weights), std::move(bias), Activation::Identity});
  return Network(std::move(layers), std::move(norm), st);
}

inline Vec random_vec(std::mt19937_64& gen, std::size_t n, double lo, double hi) {
  Vec v(n);
  for (double& x : v) x = acts::rng::uniform(gen, lo, hi);
  return v;
}

/// Random net with mixed activations over 1-3 layers, selectable transform.
inline Network random_net(std::mt19937_64& gen, std::size_t m, std::size_t k,
                          std::size_t depth) {
  static const Activation kPool[] = {Activation::ReLU, Activation::Sigmoid, Activation::Tanh,
                                     Activation::Identity};
  std::vector<std::size_t> widths{m};
  for (std::size_t l = 0; l + 1 < depth; ++l) widths.push_back(2 + gen() % 8);
  widths.push_back(k);
  std::vector<Activation> acts;
  for (std::size_t l = 0; l + 1 < depth; ++l) acts.push_back(kPool[gen() % 4]);
  acts.push_back(gen() % 2 == 0 ? Activation::Identity : Activation::Tanh);
  ScoreTransform st =
      gen() % 2 == 0 ? ScoreTransform::NegLogit : ScoreTransform::NegLogSoftmax;
  return acts::make_random_network(widths, acts, st, gen());
}

/// True when every ReLU pre-activation at x has magnitude above `margin`,
/// i.e. central differences will not straddle a kink.
inline bool away_from_relu_kinks(const Network& net, const Vec& x, double margin) {
  Network::Tape tape;
  net.run_forward(x, tape);
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    if (net.layers()[l].activation != Activation::ReLU) continue;
    for (double z : tape.pre[l])
      if (std::abs(z) < margin) return false;
  }
  return true;
}

inline Vec sample_interior_point(const Network& net, std::mt19937_64& gen,
                                 double margin = 1e-3) {
  for (int tries = 0; tries < 200; ++tries) {
    Vec x = random_vec(gen, net.num_inputs(), 0.05, 0.95);
    if (away_from_relu_kinks(net, x, margin)) return x;
  }
  throw std::runtime_error("could not sample a point away from ReLU kinks");
}

/// Central-difference Jacobian of the loss-domain scores w.r.t. the raw
/// input: (D_j(x + h e_i) - D_j(x - h e_i)) / 2h.
inline Mat fd_jacobian(const Network& net, const Vec& x, double h = 1e-4) {
  Mat jac(net.num_classes(), net.num_inputs());
  for (std::size_t i = 0; i < net.num_inputs(); ++i) {
    Vec xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    Vec yp = net.forward(xp);
    Vec ym = net.forward(xm);
    for (std::size_t j = 0; j < net.num_classes(); ++j)
      jac(j, i) = (yp[j] - ym[j]) / (2.0 * h);
  }
  return jac;
}

/// Central-difference gradient of the scalar cross-entropy loss.
inline Vec fd_loss_gradient(const Network& net, const Vec& x, int label, double h = 1e-4) {
  auto loss = [&](const Vec& p) {
    Vec z = net.logits(p);
    Vec prob = acts::softmax(z);
    return -std::log(prob[static_cast<std::size_t>(label)]);
  };
  Vec g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    Vec xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (loss(xp) - loss(xm)) / (2.0 * h);
  }
  return g;
}

/// gradcheck-style comparison: |a-b| <= atol + rtol * max(|a|,|b|).
inline bool close(double a, double b, double rtol, double atol) {
  return std::abs(a - b) <= atol + rtol * std::max(std::abs(a), std::abs(b));
}

inline double max_mismatch(const Mat& a, const Mat& b, double rtol, double atol) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    double denom = atol + rtol * std::max(std::abs(a.data[i]), std::abs(b.data[i]));
    worst = std::max(worst, std::abs(a.data[i] - b.data[i]) / denom);
  }
  return worst;  // <= 1.0 means every entry passes
}

}  // namespace testutil
