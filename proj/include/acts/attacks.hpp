#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "acts/common.hpp"
#include "acts/network.hpp"

namespace acts {

enum class AttackMethod { Fgsm, Bim, Pgd };

inline const char* attack_method_name(AttackMethod m) {
  switch (m) {
    case AttackMethod::Fgsm: return "fgsm";
    case AttackMethod::Bim: return "bim";
    case AttackMethod::Pgd: return "pgd";
  }
  return "fgsm";
}

inline AttackMethod attack_method_from_name(const std::string& s) {
  if (s == "fgsm") return AttackMethod::Fgsm;
  if (s == "bim") return AttackMethod::Bim;
  if (s == "pgd") return AttackMethod::Pgd;
  throw ValidationError("unknown attack method: '" + s + "'");
}

struct AttackConfig {
  AttackMethod method = AttackMethod::Fgsm;
  double epsilon = 0.0;    // L-inf budget in raw-input units
  int steps = 0;           // 0 = default (1 for FGSM, 3 for BIM/PGD)
  double step_size = 0.0;  // 0 = default (epsilon for FGSM, epsilon/2 otherwise)
  std::uint64_t seed = 0;  // PGD random start

  /// Copy with the defaults resolved.
  AttackConfig normalized() const {
    AttackConfig c = *this;
    if (c.steps <= 0) c.steps = c.method == AttackMethod::Fgsm ? 1 : 3;
    if (c.step_size <= 0.0)
      c.step_size = c.method == AttackMethod::Fgsm ? c.epsilon : c.epsilon / 2.0;
    return c;
  }

  void validate() const {
    if (!(epsilon > 0.0)) throw ValidationError("attack: epsilon must be > 0");
    if (steps < 1) throw ValidationError("attack: steps must be >= 1");
    if (!(step_size > 0.0)) throw ValidationError("attack: step_size must be > 0");
    if (method == AttackMethod::Fgsm && steps != 1)
      throw ValidationError("attack: FGSM is single-step");
  }
};

/// Full record of one attack run. Deltas are the effective (post-projection)
/// per-step perturbations, so x_adv == clip(x0 + sum(deltas)) exactly. PGD
/// stores its random initial jump as deltas[0], giving steps + 1 entries.
struct AttackTrace {
  Vec x0;
  std::vector<Vec> deltas;
  Vec x_adv;
  bool success = false;
  int adv_label = -1;
  int true_label = -1;
  AttackConfig config;
};

namespace detail {

inline void check_attack_input(const Network& net, const Vec& x, int t_true) {
  for (double v : x)
    if (v < 0.0 || v > 1.0)
      throw ValidationError("attack: input outside [0,1]");
  if (net.classify(x) != t_true)
    throw ValidationError("attack: input is not classified as the given true label (" +
                          std::to_string(t_true) + "); attacks run on correctly "
                          "classified samples only");
}

inline void finish_trace(const Network& net, AttackTrace& trace) {
  trace.adv_label = net.classify(trace.x_adv);
  trace.success = trace.adv_label != trace.true_label;
}

// One signed-gradient step from `cur`, with the cumulative perturbation
// projected into the epsilon ball first and the input into [0,1] second.
inline Vec project_step(const Vec& x0, const Vec& cur, const Vec& grad, double step_size,
                        double epsilon) {
  Vec next(cur.size());
  for (std::size_t i = 0; i < cur.size(); ++i) {
    double p = cur[i] + step_size * sign(grad[i]) - x0[i];
    p = std::max(-epsilon, std::min(epsilon, p));
    next[i] = clamp01(x0[i] + p);
  }
  return next;
}

}  // namespace detail

inline AttackTrace fgsm(const Network& net, const Vec& x, int t_true, const AttackConfig& cfg_in) {
  AttackConfig cfg = cfg_in.normalized();
  cfg.method = AttackMethod::Fgsm;
  cfg.validate();
  detail::check_attack_input(net, x, t_true);

  AttackTrace trace;
  trace.x0 = x;
  trace.true_label = t_true;
  trace.config = cfg;
  Vec g = net.loss_gradient(x, t_true);
  Vec adv(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) adv[i] = clamp01(x[i] + cfg.epsilon * sign(g[i]));
  Vec delta(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) delta[i] = adv[i] - x[i];
  trace.deltas.push_back(std::move(delta));
  trace.x_adv = std::move(adv);
  detail::finish_trace(net, trace);
  return trace;
}

inline AttackTrace bim(const Network& net, const Vec& x, int t_true, const AttackConfig& cfg_in) {
  AttackConfig cfg = cfg_in.normalized();
  cfg.method = AttackMethod::Bim;
  cfg.validate();
  detail::check_attack_input(net, x, t_true);

  AttackTrace trace;
  trace.x0 = x;
  trace.true_label = t_true;
  trace.config = cfg;
  Vec cur = x;
  for (int q = 0; q < cfg.steps; ++q) {
    Vec g = net.loss_gradient(cur, t_true);
    Vec next = detail::project_step(x, cur, g, cfg.step_size, cfg.epsilon);
    Vec delta(cur.size());
    for (std::size_t i = 0; i < cur.size(); ++i) delta[i] = next[i] - cur[i];
    trace.deltas.push_back(std::move(delta));
    cur = std::move(next);
  }
  trace.x_adv = std::move(cur);
  detail::finish_trace(net, trace);
  return trace;
}

inline AttackTrace pgd(const Network& net, const Vec& x, int t_true, const AttackConfig& cfg_in) {
  AttackConfig cfg = cfg_in.normalized();
  cfg.method = AttackMethod::Pgd;
  cfg.validate();
  detail::check_attack_input(net, x, t_true);

  AttackTrace trace;
  trace.x0 = x;
  trace.true_label = t_true;
  trace.config = cfg;
  std::mt19937_64 gen(cfg.seed);
  Vec cur(x.size());
  Vec jump(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    cur[i] = clamp01(x[i] + rng::uniform(gen, -cfg.epsilon, cfg.epsilon));
    jump[i] = cur[i] - x[i];
  }
  trace.deltas.push_back(std::move(jump));
  for (int q = 0; q < cfg.steps; ++q) {
    Vec g = net.loss_gradient(cur, t_true);
    Vec next = detail::project_step(x, cur, g, cfg.step_size, cfg.epsilon);
    Vec delta(cur.size());
    for (std::size_t i = 0; i < cur.size(); ++i) delta[i] = next[i] - cur[i];
    trace.deltas.push_back(std::move(delta));
    cur = std::move(next);
  }
  trace.x_adv = std::move(cur);
  detail::finish_trace(net, trace);
  return trace;
}

inline AttackTrace run_attack(const Network& net, const Vec& x, int t_true,
                              const AttackConfig& cfg) {
  switch (cfg.method) {
    case AttackMethod::Fgsm: return fgsm(net, x, t_true, cfg);
    case AttackMethod::Bim: return bim(net, x, t_true, cfg);
    case AttackMethod::Pgd: return pgd(net, x, t_true, cfg);
  }
  throw ValidationError("unknown attack method");
}

/// Re-derives the success flag from the trace contents alone.
inline bool recheck_success(const Network& net, const AttackTrace& trace) {
  Vec x = trace.x0;
  for (const Vec& d : trace.deltas)
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += d[i];
  for (double& v : x) v = clamp01(v);
  return net.classify(x) != trace.true_label;
}

inline nlohmann::json attack_config_to_json(const AttackConfig& cfg) {
  return {{"method", attack_method_name(cfg.method)},
          {"epsilon", cfg.epsilon},
          {"steps", cfg.steps},
          {"step_size", cfg.step_size},
          {"seed", cfg.seed}};
}

inline AttackConfig attack_config_from_json(const nlohmann::json& j) {
  AttackConfig cfg;
  cfg.method = attack_method_from_name(j.at("method").get<std::string>());
  cfg.epsilon = j.at("epsilon").get<double>();
  cfg.steps = j.at("steps").get<int>();
  cfg.step_size = j.at("step_size").get<double>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  return cfg;
}

inline nlohmann::json trace_to_json(const AttackTrace& trace) {
  return {{"x0", trace.x0},
          {"deltas", trace.deltas},
          {"x_adv", trace.x_adv},
          {"success", trace.success},
          {"adv_label", trace.adv_label},
          {"true_label", trace.true_label},
          {"config", attack_config_to_json(trace.config)}};
}

inline AttackTrace trace_from_json(const nlohmann::json& j) {
  AttackTrace trace;
  trace.x0 = j.at("x0").get<Vec>();
  trace.deltas = j.at("deltas").get<std::vector<Vec>>();
  trace.x_adv = j.at("x_adv").get<Vec>();
  trace.success = j.at("success").get<bool>();
  trace.adv_label = j.at("adv_label").get<int>();
  trace.true_label = j.at("true_label").get<int>();
  trace.config = attack_config_from_json(j.at("config"));
  return trace;
}

}  // namespace acts
