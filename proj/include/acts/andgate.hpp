#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "acts/attacks.hpp"
#include "acts/common.hpp"
#include "acts/data_io.hpp"
#include "acts/metric.hpp"
#include "acts/network.hpp"
#include "acts/train.hpp"

namespace acts {

enum class Sampling { Grid, UniformRandom };

inline int and_gate_label(double x1, double x2) {
  return (x1 >= 0.5 && x2 >= 0.5) ? 1 : 0;
}

/// Two-feature dataset for the AND-gate rule: label 1 iff both inputs are at
/// least 0.5. Grid sampling lays out floor(sqrt(n))^2 points spanning [0,1]^2
/// inclusive; UniformRandom draws n seeded points.
inline Dataset generate_and_dataset(std::size_t n, Sampling sampling, std::uint64_t seed) {
  if (n < 4) throw ValidationError("generate_and_dataset: n must be >= 4");
  Dataset ds;
  if (sampling == Sampling::Grid) {
    auto side = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
    while (side * side > n) --side;  // guard against sqrt rounding up
    for (std::size_t i = 0; i < side; ++i)
      for (std::size_t j = 0; j < side; ++j) {
        double x1 = static_cast<double>(i) / static_cast<double>(side - 1);
        double x2 = static_cast<double>(j) / static_cast<double>(side - 1);
        ds.features.push_back({x1, x2});
      }
  } else {
    std::mt19937_64 gen(seed);
    for (std::size_t r = 0; r < n; ++r) {
      double x1 = rng::uniform01(gen);
      double x2 = rng::uniform01(gen);
      ds.features.push_back({x1, x2});
    }
  }
  bool has0 = false, has1 = false;
  for (std::size_t r = 0; r < ds.features.size(); ++r) {
    int label = and_gate_label(ds.features[r][0], ds.features[r][1]);
    (label == 1 ? has1 : has0) = true;
    ds.labels.push_back(label);
    ds.ids.push_back(std::to_string(r));
  }
  if (!has0 || !has1)
    throw ComputeError("generate_and_dataset: degenerate dataset, only one class present");
  return ds;
}

struct ToyCell {
  double x1 = 0.0;
  double x2 = 0.0;
  int label = 0;
  double score = 0.0;  // 0 on the label-0 region; cap sentinel if unattackable
};

struct ToyResult {
  Network net;
  double test_accuracy = 0.0;
  std::uint64_t seed_used = 0;  // base seed of the attempt that reached 0.99
  int grid_resolution = 0;
  double fgsm_epsilon = 0.0;
  std::vector<ToyCell> grid;  // row-major: x1 outer, x2 inner
};

/// End-to-end toy experiment: train a 2-8-2 ReLU net on the AND gate, then
/// sweep a grid and record the one-step ACTS under FGSM for every label-1
/// point. Label-0 points (and the rare misclassified ones, which need no
/// perturbation at all) get score 0.
inline ToyResult run_toy_experiment(int grid_resolution, double fgsm_epsilon = 0.1,
                                    std::uint64_t seed = 0) {
  if (grid_resolution < 10)
    throw ValidationError("run_toy_experiment: grid_resolution must be >= 10");
  if (!(fgsm_epsilon > 0.0))
    throw ValidationError("run_toy_experiment: fgsm_epsilon must be > 0");

  constexpr std::size_t kTrainSize = 10000;
  constexpr std::size_t kTestSize = 2000;
  constexpr int kEpochs = 30;
  constexpr double kLearningRate = 0.3;
  constexpr int kMaxAttempts = 5;

  std::optional<Network> trained;
  double test_acc = 0.0;
  std::uint64_t seed_used = 0;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    std::uint64_t base = seed + static_cast<std::uint64_t>(attempt);
    std::mt19937_64 master(base);
    std::uint64_t train_seed = master();
    std::uint64_t test_seed = master();
    std::uint64_t init_seed = master();
    std::uint64_t sgd_seed = master();

    Dataset train_ds = generate_and_dataset(kTrainSize, Sampling::UniformRandom, train_seed);
    Dataset test_ds = generate_and_dataset(kTestSize, Sampling::UniformRandom, test_seed);
    Network net0 = make_random_network({2, 8, 2}, {Activation::ReLU, Activation::Identity},
                                       ScoreTransform::NegLogit, init_seed);
    TrainResult result = train_sgd(net0, train_ds, kEpochs, kLearningRate, sgd_seed);
    double acc = accuracy(result.net, test_ds);
    if (acc >= 0.99) {
      trained.emplace(std::move(result.net));
      test_acc = acc;
      seed_used = base;
      break;
    }
  }
  if (!trained)
    throw ComputeError("run_toy_experiment: test accuracy stayed below 0.99 after " +
                       std::to_string(kMaxAttempts) + " attempts");

  ToyResult toy{std::move(*trained), test_acc, seed_used, grid_resolution, fgsm_epsilon, {}};
  AttackConfig cfg{AttackMethod::Fgsm, fgsm_epsilon, 1, fgsm_epsilon, 0};
  for (int i = 0; i < grid_resolution; ++i)
    for (int j = 0; j < grid_resolution; ++j) {
      ToyCell cell;
      cell.x1 = static_cast<double>(i) / (grid_resolution - 1);
      cell.x2 = static_cast<double>(j) / (grid_resolution - 1);
      cell.label = and_gate_label(cell.x1, cell.x2);
      if (cell.label == 1) {
        Vec x{cell.x1, cell.x2};
        if (toy.net.classify(x) == 1) {
          AttackTrace trace = fgsm(toy.net, x, 1, cfg);
          Vec y = toy.net.forward(x);
          Djm djm = toy.net.input_jacobian(x);
          if (norm_l2(trace.deltas.front()) == 0.0) {
            cell.score = kInf;  // gradient dead here: unattackable along FGSM
          } else {
            SpeedVector speeds = one_step_speeds(djm, trace.deltas.front(), NormKind::L2);
            cell.score = acts_score(y, 1, speeds, 1).score;
          }
        }
      }
      toy.grid.push_back(cell);
    }
  return toy;
}

inline void write_toy_grid_csv(const ToyResult& toy, std::ostream& out) {
  out << "x1,x2,label,acts_score\n";
  for (const ToyCell& cell : toy.grid)
    out << format_double(cell.x1) << ',' << format_double(cell.x2) << ',' << cell.label << ','
        << format_double(cell.score) << "\n";
}

}  // namespace acts
