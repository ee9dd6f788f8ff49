#pragma once

#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

#include "acts/common.hpp"
#include "acts/data_io.hpp"
#include "acts/network.hpp"

namespace acts {

struct TrainResult {
  Network net;
  double accuracy;   // on the training dataset, after the last epoch
  double mean_loss;  // mean cross-entropy over the last epoch (0 if epochs == 0)
};

/// Plain per-sample SGD on softmax cross-entropy over the raw outputs.
/// Deterministic given the seed; the input network only provides the
/// starting point and is left untouched.
inline TrainResult train_sgd(const Network& net, const Dataset& data, int epochs, double lr,
                             std::uint64_t seed) {
  if (data.size() == 0) throw ValidationError("train_sgd: empty dataset");
  if (data.num_features() != net.num_inputs())
    throw ValidationError("train_sgd: dataset has " + std::to_string(data.num_features()) +
                          " features, network expects " + std::to_string(net.num_inputs()));
  for (std::size_t r = 0; r < data.size(); ++r)
    if (data.labels[r] < 0 || static_cast<std::size_t>(data.labels[r]) >= net.num_classes())
      throw ValidationError("train_sgd: label out of range at row " + std::to_string(r));

  std::vector<DenseLayer> layers = net.layers();
  const Normalization& norm = net.normalization();
  const std::size_t depth = layers.size();

  std::mt19937_64 gen(seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  std::vector<Vec> post(depth + 1);  // post[0] = normalized input
  std::vector<Vec> pre(depth);
  double epoch_loss = 0.0;

  for (int e = 0; e < epochs; ++e) {
    rng::shuffle(order, gen);
    epoch_loss = 0.0;
    for (std::size_t idx : order) {
      const Vec& x = data.features[idx];
      const int label = data.labels[idx];

      post[0].resize(x.size());
      for (std::size_t i = 0; i < x.size(); ++i)
        post[0][i] = (x[i] - norm.mean[i]) / norm.std[i];
      for (std::size_t l = 0; l < depth; ++l) {
        Vec z = matvec(layers[l].weights, post[l]);
        for (std::size_t i = 0; i < z.size(); ++i) z[i] += layers[l].bias[i];
        pre[l] = z;
        for (double& v : z) v = Network::activation_apply(layers[l].activation, v);
        post[l + 1] = std::move(z);
      }

      Vec p = softmax(post[depth]);
      double loss = -std::log(std::max(p[static_cast<std::size_t>(label)], 1e-300));
      if (!std::isfinite(loss))
        throw ComputeError("train_sgd: training diverged (non-finite loss) at epoch " +
                           std::to_string(e));
      epoch_loss += loss;

      Vec delta = std::move(p);  // dL/dlogits
      delta[static_cast<std::size_t>(label)] -= 1.0;
      for (std::size_t l = depth; l-- > 0;) {
        for (std::size_t i = 0; i < delta.size(); ++i)
          delta[i] *= Network::activation_prime(layers[l].activation, pre[l][i], post[l + 1][i]);
        Vec prev = matvec_t(layers[l].weights, delta);
        for (std::size_t r = 0; r < layers[l].weights.rows; ++r) {
          for (std::size_t c = 0; c < layers[l].weights.cols; ++c)
            layers[l].weights(r, c) -= lr * delta[r] * post[l][c];
          layers[l].bias[r] -= lr * delta[r];
        }
        delta = std::move(prev);
      }
    }
    epoch_loss /= static_cast<double>(data.size());
  }

  Network trained(std::move(layers), norm, net.transform());
  std::size_t correct = 0;
  for (std::size_t r = 0; r < data.size(); ++r)
    if (trained.classify(data.features[r]) == data.labels[r]) ++correct;
  double acc = static_cast<double>(correct) / static_cast<double>(data.size());
  return TrainResult{std::move(trained), acc, epochs > 0 ? epoch_loss : 0.0};
}

/// Fraction of samples the network classifies correctly.
inline double accuracy(const Network& net, const Dataset& data) {
  if (data.size() == 0) throw ValidationError("accuracy: empty dataset");
  std::size_t correct = 0;
  for (std::size_t r = 0; r < data.size(); ++r)
    if (net.classify(data.features[r]) == data.labels[r]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

}  // namespace acts
