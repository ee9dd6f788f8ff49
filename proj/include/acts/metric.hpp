#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "acts/common.hpp"
#include "acts/network.hpp"

namespace acts {

/// Norm used in the speed denominator. L2 matches the geometric reading of
/// speed along a direction and is the default; Linf is selectable.
enum class NormKind { L2, Linf };

inline const char* norm_kind_name(NormKind n) { return n == NormKind::L2 ? "l2" : "linf"; }

inline NormKind norm_kind_from_name(const std::string& s) {
  if (s == "l2") return NormKind::L2;
  if (s == "linf") return NormKind::Linf;
  throw ValidationError("unknown norm kind: '" + s + "'");
}

/// Estimated moving speed of each loss-domain score per unit input
/// perturbation along the probed direction(s).
struct SpeedVector {
  Vec s;
  NormKind norm_kind = NormKind::L2;
};

namespace detail {

inline double delta_norm(const Vec& d, NormKind nk) {
  return nk == NormKind::L2 ? norm_l2(d) : norm_linf(d);
}

}  // namespace detail

/// s_j = (Djm_j . delta) / ||delta|| for a single-step perturbation.
inline SpeedVector one_step_speeds(const Djm& djm, const Vec& delta_x, NormKind norm_kind) {
  if (delta_x.size() != djm.cols)
    throw ValidationError("one_step_speeds: delta size " + std::to_string(delta_x.size()) +
                          " != DJM columns " + std::to_string(djm.cols));
  double n = detail::delta_norm(delta_x, norm_kind);
  if (n == 0.0) throw ComputeError("one_step_speeds: degenerate (zero) perturbation");
  SpeedVector sv{Vec(djm.rows, 0.0), norm_kind};
  for (std::size_t j = 0; j < djm.rows; ++j) sv.s[j] = dot_row(djm, j, delta_x) / n;
  return sv;
}

/// Unweighted mean of per-step speeds over the steps that actually moved;
/// zero-norm steps are excluded from the average.
inline SpeedVector multi_step_speeds(const Djm& djm, const std::vector<Vec>& deltas,
                                     NormKind norm_kind) {
  SpeedVector sv{Vec(djm.rows, 0.0), norm_kind};
  std::size_t used = 0;
  for (const Vec& d : deltas) {
    if (d.size() != djm.cols)
      throw ValidationError("multi_step_speeds: delta size " + std::to_string(d.size()) +
                            " != DJM columns " + std::to_string(djm.cols));
    double n = detail::delta_norm(d, norm_kind);
    if (n == 0.0) continue;
    for (std::size_t j = 0; j < djm.rows; ++j) sv.s[j] += dot_row(djm, j, d) / n;
    ++used;
  }
  if (used == 0)
    throw ComputeError("multi_step_speeds: all perturbation steps are degenerate (zero)");
  for (double& v : sv.s) v /= static_cast<double>(used);
  return sv;
}

/// Converging times for one input. `score` is the cap sentinel when no
/// candidate class has positive closing speed.
struct ActsResult {
  std::map<int, double> times;  // candidate class -> converging time
  int winner = -1;              // candidate with the smallest time
  double score = 0.0;           // min time, or the cap
  bool capped = false;          // true iff every candidate had s_t - s_j <= 0
  int t = -1;                   // clean predicted class
  std::vector<int> candidates;  // probability-ranked candidate set used
};

/// Converging time per candidate class: the loss-domain gap y_j - y_t over
/// the closing speed s_t - s_j, capped at `cap` when the gap cannot close.
/// Candidates are the k most probable classes excluding t (k is clipped to
/// K-1). A zero gap with positive closing speed counts as time 0.
inline ActsResult acts_score(const Vec& y, int t, const SpeedVector& speeds, int k,
                             double cap = kInf) {
  const std::size_t num_classes = y.size();
  if (num_classes < 2) throw ValidationError("acts_score: need at least 2 classes");
  if (speeds.s.size() != num_classes)
    throw ValidationError("acts_score: speed vector size != number of classes");
  if (t < 0 || static_cast<std::size_t>(t) >= num_classes)
    throw ValidationError("acts_score: class t out of range");
  if (k < 1) throw ValidationError("acts_score: k must be >= 1");
  if (!(cap > 0.0)) throw ValidationError("acts_score: cap must be positive");
  double y_min = *std::min_element(y.begin(), y.end());
  if (y[static_cast<std::size_t>(t)] != y_min)
    throw ValidationError("acts_score: t is not the argmin of the scores");

  // Rank the other classes by ascending loss-domain score (descending
  // probability); ties break to the lower class index.
  std::vector<int> order;
  order.reserve(num_classes - 1);
  for (std::size_t j = 0; j < num_classes; ++j)
    if (static_cast<int>(j) != t) order.push_back(static_cast<int>(j));
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return y[static_cast<std::size_t>(a)] < y[static_cast<std::size_t>(b)]; });
  std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(k), order.size());
  order.resize(take);

  ActsResult res;
  res.t = t;
  res.candidates = order;
  res.capped = true;
  const double y_t = y[static_cast<std::size_t>(t)];
  const double s_t = speeds.s[static_cast<std::size_t>(t)];
  for (int j : order) {
    double gap = y[static_cast<std::size_t>(j)] - y_t;
    double closing = s_t - speeds.s[static_cast<std::size_t>(j)];
    double time;
    if (closing > 0.0) {
      res.capped = false;
      time = gap == 0.0 ? 0.0 : gap / closing;
    } else {
      time = cap;
    }
    res.times[j] = time;
    if (res.winner < 0 || time < res.score || (time == res.score && j < res.winner)) {
      res.winner = j;
      res.score = time;
    }
  }
  return res;
}

inline nlohmann::json acts_result_to_json(const ActsResult& res) {
  nlohmann::json times = nlohmann::json::object();
  for (const auto& [cls, time] : res.times)
    times[std::to_string(cls)] = std::isinf(time) ? nlohmann::json("inf") : nlohmann::json(time);
  return {{"times", std::move(times)},
          {"winner", res.winner},
          {"score", res.capped || std::isinf(res.score) ? nlohmann::json("inf")
                                                        : nlohmann::json(res.score)},
          {"capped", res.capped},
          {"t", res.t},
          {"candidates", res.candidates},
          {"k", res.candidates.size()}};
}

}  // namespace acts
