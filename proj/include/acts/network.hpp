#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "acts/common.hpp"
#include "acts/linalg.hpp"

namespace acts {

enum class Activation { ReLU, Sigmoid, Tanh, Identity };

/// Maps raw network outputs (logits) to loss-domain scores y, where the
/// predicted class is the argmin. NegLogit is y = -z; NegLogSoftmax is
/// y = -log softmax(z), i.e. the per-class cross-entropy value.
enum class ScoreTransform { NegLogit, NegLogSoftmax };

struct DenseLayer {
  Mat weights;  // out x in, row-major
  Vec bias;     // out
  Activation activation = Activation::Identity;
};

/// Per-feature input normalization, applied as (x - mean) / std before the
/// first layer. Attacks and epsilon budgets live in the raw [0,1] domain,
/// so gradients w.r.t. the raw input pick up a 1/std factor per feature.
struct Normalization {
  Vec mean;
  Vec std;
};

inline const char* activation_name(Activation a) {
  switch (a) {
    case Activation::ReLU: return "relu";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Tanh: return "tanh";
    case Activation::Identity: return "identity";
  }
  return "identity";
}

inline Activation activation_from_name(const std::string& s) {
  if (s == "relu") return Activation::ReLU;
  if (s == "sigmoid") return Activation::Sigmoid;
  if (s == "tanh") return Activation::Tanh;
  if (s == "identity") return Activation::Identity;
  throw ValidationError("unknown activation: '" + s + "'");
}

inline const char* score_transform_name(ScoreTransform st) {
  return st == ScoreTransform::NegLogit ? "neg_logit" : "neg_log_softmax";
}

inline ScoreTransform score_transform_from_name(const std::string& s) {
  if (s == "neg_logit") return ScoreTransform::NegLogit;
  if (s == "neg_log_softmax") return ScoreTransform::NegLogSoftmax;
  throw ValidationError("unknown score_transform: '" + s + "'");
}

inline Vec softmax(const Vec& z) {
  double m = *std::max_element(z.begin(), z.end());
  Vec p(z.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    p[i] = std::exp(z[i] - m);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

/// Data Jacobian Matrix: K x M, entry (j,i) = d y_j / d x_i evaluated at the
/// raw (pre-normalization) input.
using Djm = Mat;

/// Dense feed-forward classifier. Immutable after construction; all member
/// operations are pure and safe to call concurrently.
class Network {
 public:
  Network(std::vector<DenseLayer> layers, Normalization normalization,
          ScoreTransform transform)
      : layers_(std::move(layers)),
        norm_(std::move(normalization)),
        transform_(transform) {
    if (layers_.empty()) throw ValidationError("network needs at least one layer");
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      const DenseLayer& d = layers_[l];
      if (d.weights.rows == 0 || d.weights.cols == 0)
        throw ValidationError("layer " + std::to_string(l) + ": empty weight matrix");
      if (d.bias.size() != d.weights.rows)
        throw ValidationError("layer " + std::to_string(l) + ": bias size " +
                              std::to_string(d.bias.size()) + " != output width " +
                              std::to_string(d.weights.rows));
      if (l > 0 && d.weights.cols != layers_[l - 1].weights.rows)
        throw ValidationError("layer " + std::to_string(l) + ": input width " +
                              std::to_string(d.weights.cols) +
                              " != previous output width " +
                              std::to_string(layers_[l - 1].weights.rows));
      if (!d.weights.finite() || !all_finite(d.bias))
        throw ValidationError("layer " + std::to_string(l) + ": non-finite parameter");
    }
    if (num_classes() < 2) throw ValidationError("network needs at least 2 classes");
    const std::size_t m = num_inputs();
    if (norm_.mean.size() != m || norm_.std.size() != m)
      throw ValidationError("normalization size != num_inputs");
    if (!all_finite(norm_.mean) || !all_finite(norm_.std))
      throw ValidationError("non-finite normalization");
    for (double s : norm_.std)
      if (s <= 0.0) throw ValidationError("normalization std must be strictly positive");
  }

  std::size_t num_inputs() const { return layers_.front().weights.cols; }
  std::size_t num_classes() const { return layers_.back().weights.rows; }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  const Normalization& normalization() const { return norm_; }
  ScoreTransform transform() const { return transform_; }

  /// Raw network outputs (logits) for a raw input.
  Vec logits(const Vec& x) const {
    Tape tape;
    run_forward(x, tape);
    return tape.post.back();
  }

  /// Loss-domain scores y; lower means more likely.
  Vec forward(const Vec& x) const { return scores_from_logits(logits(x)); }

  /// Predicted class: argmin of the loss-domain scores, ties to the lowest
  /// class index.
  int classify(const Vec& x) const {
    Vec y = forward(x);
    return static_cast<int>(std::min_element(y.begin(), y.end()) - y.begin());
  }

  /// Exact reverse-mode Jacobian of the loss-domain scores w.r.t. the raw
  /// input, including the 1/std factor from normalization. One vectorized
  /// backward pass carrying all K rows.
  Djm input_jacobian(const Vec& x) const {
    Tape tape;
    run_forward(x, tape);
    const std::size_t k = num_classes();
    Mat grad = score_seed(tape.post.back());  // K x K: dy / dlogits
    for (std::size_t l = layers_.size(); l-- > 0;) {
      const DenseLayer& layer = layers_[l];
      // grad rows currently hold dy/da_l; fold in the activation, then the
      // weight matrix to land on dy/da_{l-1}.
      for (std::size_t r = 0; r < k; ++r)
        for (std::size_t c = 0; c < layer.weights.rows; ++c)
          grad(r, c) *= activation_prime(layer.activation, tape.pre[l][c], tape.post[l + 1][c]);
      grad = matmul(grad, layer.weights);
    }
    for (std::size_t r = 0; r < k; ++r)
      for (std::size_t c = 0; c < num_inputs(); ++c) grad(r, c) /= norm_.std[c];
    return grad;
  }

  /// Gradient w.r.t. the raw input of the cross-entropy between
  /// softmax(logits) and the one-hot label.
  Vec loss_gradient(const Vec& x, int label) const {
    if (label < 0 || static_cast<std::size_t>(label) >= num_classes())
      throw ValidationError("label " + std::to_string(label) + " out of range [0," +
                            std::to_string(num_classes()) + ")");
    Tape tape;
    run_forward(x, tape);
    Vec g = softmax(tape.post.back());
    g[static_cast<std::size_t>(label)] -= 1.0;
    backward_vec(tape, g);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] /= norm_.std[i];
    return g;
  }

  // Exposed for the training loop, which needs intermediate activations.
  struct Tape {
    std::vector<Vec> pre;   // per layer: z = W a + b
    std::vector<Vec> post;  // post[0] = normalized input, post[l+1] = act(z_l)
  };

  void run_forward(const Vec& x, Tape& tape) const {
    check_input(x);
    const std::size_t n = layers_.size();
    tape.pre.resize(n);
    tape.post.resize(n + 1);
    Vec a(num_inputs());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = (x[i] - norm_.mean[i]) / norm_.std[i];
    tape.post[0] = std::move(a);
    for (std::size_t l = 0; l < n; ++l) {
      Vec z = matvec(layers_[l].weights, tape.post[l]);
      for (std::size_t i = 0; i < z.size(); ++i) z[i] += layers_[l].bias[i];
      tape.pre[l] = z;
      for (double& v : z) v = activation_apply(layers_[l].activation, v);
      tape.post[l + 1] = std::move(z);
    }
  }

  Vec scores_from_logits(const Vec& z) const {
    Vec y(z.size());
    if (transform_ == ScoreTransform::NegLogit) {
      for (std::size_t i = 0; i < z.size(); ++i) y[i] = -z[i];
    } else {
      double m = *std::max_element(z.begin(), z.end());
      double sum = 0.0;
      for (double v : z) sum += std::exp(v - m);
      double lse = m + std::log(sum);
      for (std::size_t i = 0; i < z.size(); ++i) y[i] = lse - z[i];
    }
    return y;
  }

  static double activation_apply(Activation a, double z) {
    switch (a) {
      case Activation::ReLU: return z > 0.0 ? z : 0.0;
      case Activation::Sigmoid: return 1.0 / (1.0 + std::exp(-z));
      case Activation::Tanh: return std::tanh(z);
      case Activation::Identity: return z;
    }
    return z;
  }

  // Derivative in terms of pre-activation z and post-activation a.
  // ReLU'(0) is defined as 0 so the Jacobian is total.
  static double activation_prime(Activation act, double z, double a) {
    switch (act) {
      case Activation::ReLU: return z > 0.0 ? 1.0 : 0.0;
      case Activation::Sigmoid: return a * (1.0 - a);
      case Activation::Tanh: return 1.0 - a * a;
      case Activation::Identity: return 1.0;
    }
    return 1.0;
  }

 private:
  void check_input(const Vec& x) const {
    if (x.size() != num_inputs())
      throw ValidationError("input size " + std::to_string(x.size()) +
                            " != num_inputs " + std::to_string(num_inputs()));
    if (!all_finite(x)) throw ValidationError("non-finite input");
  }

  // dy/dlogits for the configured transform, evaluated at logits z.
  Mat score_seed(const Vec& z) const {
    const std::size_t k = z.size();
    Mat seed(k, k);
    if (transform_ == ScoreTransform::NegLogit) {
      for (std::size_t j = 0; j < k; ++j) seed(j, j) = -1.0;
    } else {
      Vec p = softmax(z);
      for (std::size_t j = 0; j < k; ++j)
        for (std::size_t l = 0; l < k; ++l) seed(j, l) = p[l] - (j == l ? 1.0 : 0.0);
    }
    return seed;
  }

  // In-place backprop of a single cotangent from the logits to the
  // normalized input.
  void backward_vec(const Tape& tape, Vec& g) const {
    for (std::size_t l = layers_.size(); l-- > 0;) {
      const DenseLayer& layer = layers_[l];
      for (std::size_t c = 0; c < g.size(); ++c)
        g[c] *= activation_prime(layer.activation, tape.pre[l][c], tape.post[l + 1][c]);
      g = matvec_t(layer.weights, g);
    }
  }

  std::vector<DenseLayer> layers_;
  Normalization norm_;
  ScoreTransform transform_;
};

/// Random network for experiments and tests: He init for ReLU layers,
/// Xavier-style otherwise, zero biases, identity normalization.
inline Network make_random_network(const std::vector<std::size_t>& widths,
                                   const std::vector<Activation>& activations,
                                   ScoreTransform transform, std::uint64_t seed) {
  if (widths.size() < 2) throw ValidationError("need at least input and output widths");
  if (activations.size() != widths.size() - 1)
    throw ValidationError("need one activation per layer");
  std::mt19937_64 gen(seed);
  std::vector<DenseLayer> layers;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    DenseLayer d;
    d.weights = Mat(widths[l + 1], widths[l]);
    double scale = activations[l] == Activation::ReLU
                       ? std::sqrt(2.0 / static_cast<double>(widths[l]))
                       : std::sqrt(1.0 / static_cast<double>(widths[l]));
    for (double& w : d.weights.data) w = scale * rng::normal(gen);
    d.bias = Vec(widths[l + 1], 0.0);
    d.activation = activations[l];
    layers.push_back(std::move(d));
  }
  Normalization norm{Vec(widths.front(), 0.0), Vec(widths.front(), 1.0)};
  return Network(std::move(layers), std::move(norm), transform);
}

}  // namespace acts
