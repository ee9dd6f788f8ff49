#pragma once

#include <algorithm>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "acts/attacks.hpp"
#include "acts/common.hpp"
#include "acts/data_io.hpp"
#include "acts/metric.hpp"
#include "acts/network.hpp"

namespace acts {

struct ActsOptions {
  int k = 10;                     // candidate classes, clipped to K-1
  NormKind norm = NormKind::L2;
  double cap = kInf;
  int bins = 100;                 // histogram bins for Overlap%
  bool per_level_speeds = false;  // recompute speeds from each level's trace
                                  // instead of the lowest-epsilon trace
};

struct LevelOutcome {
  double epsilon = 0.0;
  bool success = false;
  int adv_label = -1;
  double acts_score = 0.0;  // score used at this level (equals the record
                            // score unless per_level_speeds is set)
  bool acts_capped = false;
};

struct SampleRecord {
  std::size_t index = 0;  // dataset row; also the PGD seed offset
  std::string id;
  int true_label = -1;
  int clean_pred = -1;
  double acts_score = 0.0;
  bool acts_capped = false;
  int acts_winner = -1;
  std::vector<LevelOutcome> outcomes;  // one per configured noise level
};

struct BinSpec {
  double min = 0.0;
  double max = 0.0;
  int count = 0;
};

struct LevelSummary {
  double epsilon = 0.0;
  std::size_t n_success = 0;  // uncapped records only
  std::size_t n_fail = 0;
  bool overlap_defined = false;
  double overlap = 0.0;
};

struct FlipCount {
  int lower_level = 0;  // indices into the configured level list
  int higher_level = 0;
  std::size_t count = 0;
};

struct EvalReport {
  std::vector<SampleRecord> records;
  std::vector<LevelSummary> levels;
  std::vector<FlipCount> flips;
  std::size_t capped_count = 0;
  bool mean_defined = false;
  double mean_acts = 0.0;
  BinSpec bins;
  std::vector<AttackConfig> attack_configs;
  ActsOptions acts;
};

/// Shared-binning histogram overlap: S_o / S_a over equal-width bins spanning
/// the union of both score lists. Capped (non-finite) scores must be filtered
/// out by the caller.
inline double overlap_percent(const std::vector<double>& success_scores,
                              const std::vector<double>& fail_scores, int bins) {
  if (bins < 1) throw ValidationError("overlap_percent: bins must be >= 1");
  if (success_scores.empty() && fail_scores.empty())
    throw ComputeError("overlap_percent: undefined, both score lists are empty");
  double lo = kInf, hi = -kInf;
  for (const auto* list : {&success_scores, &fail_scores})
    for (double v : *list) {
      if (!std::isfinite(v))
        throw ValidationError("overlap_percent: non-finite score (capped scores must be "
                              "excluded beforehand)");
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  std::vector<std::size_t> n_success(static_cast<std::size_t>(bins), 0);
  std::vector<std::size_t> n_fail(static_cast<std::size_t>(bins), 0);
  auto bin_of = [&](double v) -> std::size_t {
    if (hi == lo) return 0;  // all scores identical: one occupied bin
    auto b = static_cast<std::ptrdiff_t>((v - lo) / (hi - lo) * bins);
    return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(b, 0, bins - 1));
  };
  for (double v : success_scores) ++n_success[bin_of(v)];
  for (double v : fail_scores) ++n_fail[bin_of(v)];
  std::size_t shared = 0;
  for (int b = 0; b < bins; ++b)
    shared += std::min(n_success[static_cast<std::size_t>(b)], n_fail[static_cast<std::size_t>(b)]);
  return static_cast<double>(shared) /
         static_cast<double>(success_scores.size() + fail_scores.size());
}

/// Counts samples that were successfully attacked at the lower level of each
/// pair but survived the higher level.
inline std::vector<std::size_t> detect_flips(const std::vector<SampleRecord>& records,
                                             const std::vector<std::pair<int, int>>& level_pairs) {
  std::vector<std::size_t> counts(level_pairs.size(), 0);
  for (std::size_t p = 0; p < level_pairs.size(); ++p) {
    auto [lower, higher] = level_pairs[p];
    if (lower < 0 || higher < 0 || lower >= higher)
      throw ValidationError("detect_flips: level pair must satisfy 0 <= lower < higher");
    for (const SampleRecord& rec : records) {
      if (static_cast<std::size_t>(higher) >= rec.outcomes.size())
        throw ValidationError("detect_flips: record '" + rec.id +
                              "' is missing outcomes for level " + std::to_string(higher));
      if (rec.outcomes[static_cast<std::size_t>(lower)].success &&
          !rec.outcomes[static_cast<std::size_t>(higher)].success)
        ++counts[p];
    }
  }
  return counts;
}

/// Arithmetic mean of the uncapped record scores.
inline double mean_acts(const std::vector<SampleRecord>& records) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const SampleRecord& rec : records)
    if (!rec.acts_capped) {
      sum += rec.acts_score;
      ++n;
    }
  if (n == 0) throw ComputeError("mean_acts: undefined, every record is capped");
  return sum / static_cast<double>(n);
}

namespace detail {

inline SpeedVector speeds_from_trace(const Djm& djm, const AttackTrace& trace, NormKind norm) {
  for (const Vec& d : trace.deltas)
    if (delta_norm(d, norm) != 0.0) return multi_step_speeds(djm, trace.deltas, norm);
  // The attack could not move at all; zero speeds make every candidate cap.
  return SpeedVector{Vec(djm.rows, 0.0), norm};
}

}  // namespace detail

/// Full protocol: filter to correctly classified samples, score each with
/// ACTS, attack at every configured noise level, aggregate Overlap%, flips
/// and mean ACTS. Deterministic for a fixed dataset/config/seed, regardless
/// of `threads`.
inline EvalReport run_experiment(const Network& net, const Dataset& dataset,
                                 const std::vector<AttackConfig>& attack_cfgs_in,
                                 const ActsOptions& opts, int threads = 1) {
  if (dataset.size() == 0) throw ValidationError("run_experiment: empty dataset");
  if (dataset.num_features() != net.num_inputs())
    throw ValidationError("run_experiment: dataset feature count != network inputs");
  if (attack_cfgs_in.empty()) throw ValidationError("run_experiment: no attack configs");
  std::vector<AttackConfig> cfgs;
  for (const AttackConfig& c : attack_cfgs_in) {
    AttackConfig n = c.normalized();
    n.validate();
    if (!cfgs.empty() && n.method != cfgs.front().method)
      throw ValidationError("run_experiment: attack configs must share one method");
    if (!cfgs.empty() && !(n.epsilon > cfgs.back().epsilon))
      throw ValidationError("run_experiment: epsilon levels must be strictly increasing");
    cfgs.push_back(n);
  }
  if (opts.k < 1) throw ValidationError("run_experiment: k must be >= 1");
  if (opts.bins < 1) throw ValidationError("run_experiment: bins must be >= 1");
  if (threads < 1) throw ValidationError("run_experiment: threads must be >= 1");

  std::vector<std::size_t> cohort;
  for (std::size_t r = 0; r < dataset.size(); ++r)
    if (net.classify(dataset.features[r]) == dataset.labels[r]) cohort.push_back(r);
  if (cohort.empty())
    throw ComputeError("run_experiment: empty cohort, no sample is correctly classified");

  std::vector<SampleRecord> records(cohort.size());
  auto process = [&](std::size_t slot) {
    const std::size_t row = cohort[slot];
    const Vec& x = dataset.features[row];
    const int label = dataset.labels[row];
    SampleRecord rec;
    rec.index = row;
    rec.id = dataset.ids[row];
    rec.true_label = label;
    rec.clean_pred = label;

    Djm djm = net.input_jacobian(x);
    Vec y = net.forward(x);
    std::vector<AttackTrace> traces;
    traces.reserve(cfgs.size());
    for (const AttackConfig& cfg : cfgs) {
      AttackConfig per_sample = cfg;
      per_sample.seed = cfg.seed + row;
      traces.push_back(run_attack(net, x, label, per_sample));
    }

    SpeedVector base_speeds = detail::speeds_from_trace(djm, traces.front(), opts.norm);
    ActsResult base = acts_score(y, label, base_speeds, opts.k, opts.cap);
    rec.acts_score = base.score;
    rec.acts_capped = base.capped;
    rec.acts_winner = base.winner;

    for (std::size_t lvl = 0; lvl < cfgs.size(); ++lvl) {
      LevelOutcome out;
      out.epsilon = cfgs[lvl].epsilon;
      out.success = traces[lvl].success;
      out.adv_label = traces[lvl].adv_label;
      if (opts.per_level_speeds && lvl > 0) {
        ActsResult lr = acts_score(y, label, detail::speeds_from_trace(djm, traces[lvl], opts.norm),
                                   opts.k, opts.cap);
        out.acts_score = lr.score;
        out.acts_capped = lr.capped;
      } else {
        out.acts_score = base.score;
        out.acts_capped = base.capped;
      }
      rec.outcomes.push_back(out);
    }
    records[slot] = std::move(rec);
  };

  if (threads == 1) {
    for (std::size_t i = 0; i < records.size(); ++i) process(i);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&, t] {
        for (std::size_t i = static_cast<std::size_t>(t); i < records.size();
             i += static_cast<std::size_t>(threads))
          process(i);
      });
    for (std::thread& th : pool) th.join();
  }

  EvalReport report;
  report.attack_configs = cfgs;
  report.acts = opts;
  report.records = std::move(records);

  double lo = kInf, hi = -kInf;
  std::size_t uncapped = 0;
  for (const SampleRecord& rec : report.records) {
    if (rec.acts_capped) {
      ++report.capped_count;
    } else {
      lo = std::min(lo, rec.acts_score);
      hi = std::max(hi, rec.acts_score);
      ++uncapped;
    }
  }
  if (uncapped > 0) {
    report.bins = BinSpec{lo, hi, opts.bins};
    report.mean_defined = true;
    report.mean_acts = mean_acts(report.records);
  }

  for (std::size_t lvl = 0; lvl < cfgs.size(); ++lvl) {
    LevelSummary summary;
    summary.epsilon = cfgs[lvl].epsilon;
    std::vector<double> succ, fail;
    for (const SampleRecord& rec : report.records) {
      const LevelOutcome& out = rec.outcomes[lvl];
      if (out.acts_capped) continue;
      (out.success ? succ : fail).push_back(out.acts_score);
    }
    summary.n_success = succ.size();
    summary.n_fail = fail.size();
    if (!succ.empty() || !fail.empty()) {
      summary.overlap_defined = true;
      summary.overlap = overlap_percent(succ, fail, opts.bins);
    }
    report.levels.push_back(summary);
  }

  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < static_cast<int>(cfgs.size()); ++i)
    for (int j = i + 1; j < static_cast<int>(cfgs.size()); ++j) pairs.emplace_back(i, j);
  std::vector<std::size_t> counts = detect_flips(report.records, pairs);
  for (std::size_t p = 0; p < pairs.size(); ++p)
    report.flips.push_back(FlipCount{pairs[p].first, pairs[p].second, counts[p]});

  return report;
}

/// One row per sample: id, labels, record-level ACTS, then per noise level
/// the attack outcome and the score used at that level.
inline void write_report_csv(const EvalReport& report, std::ostream& out) {
  out << "sample_id,true_label,clean_pred,acts_score,acts_winner,acts_capped";
  for (std::size_t lvl = 0; lvl < report.attack_configs.size(); ++lvl)
    out << ",eps" << lvl << "_success,eps" << lvl << "_adv_label,eps" << lvl << "_acts";
  out << "\n";
  for (const SampleRecord& rec : report.records) {
    out << rec.id << ',' << rec.true_label << ',' << rec.clean_pred << ','
        << format_double(rec.acts_score) << ',' << rec.acts_winner << ','
        << (rec.acts_capped ? 1 : 0);
    for (const LevelOutcome& lo : rec.outcomes)
      out << ',' << (lo.success ? 1 : 0) << ',' << lo.adv_label << ','
          << format_double(lo.acts_score);
    out << "\n";
  }
}

inline nlohmann::json report_summary_json(const EvalReport& report) {
  nlohmann::json j;
  j["attack"] = nlohmann::json::array();
  for (const AttackConfig& cfg : report.attack_configs) j["attack"].push_back(attack_config_to_json(cfg));
  j["acts"] = {{"k", report.acts.k},
               {"norm", norm_kind_name(report.acts.norm)},
               {"cap", std::isinf(report.acts.cap) ? nlohmann::json("inf")
                                                   : nlohmann::json(report.acts.cap)},
               {"bins", report.acts.bins},
               {"per_level_speeds", report.acts.per_level_speeds}};
  j["cohort_size"] = report.records.size();
  j["capped_count"] = report.capped_count;
  j["mean_acts"] = report.mean_defined ? nlohmann::json(report.mean_acts) : nlohmann::json();
  j["bin_spec"] = {{"min", report.bins.min}, {"max", report.bins.max}, {"count", report.bins.count}};
  j["overlap"] = nlohmann::json::array();
  for (const LevelSummary& lvl : report.levels)
    j["overlap"].push_back({{"epsilon", lvl.epsilon},
                            {"n_success", lvl.n_success},
                            {"n_fail", lvl.n_fail},
                            {"overlap", lvl.overlap_defined ? nlohmann::json(lvl.overlap)
                                                            : nlohmann::json()}});
  if (report.attack_configs.size() > 1) {
    j["flips"] = nlohmann::json::array();
    for (const FlipCount& f : report.flips)
      j["flips"].push_back({{"lower_epsilon", report.attack_configs[static_cast<std::size_t>(f.lower_level)].epsilon},
                            {"higher_epsilon", report.attack_configs[static_cast<std::size_t>(f.higher_level)].epsilon},
                            {"count", f.count}});
  }
  return j;
}

}  // namespace acts
