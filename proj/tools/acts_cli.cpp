// Command-line front end: train the toy model, score datasets with ACTS,
// run attacks, and reproduce the evaluation protocol. Logs go to stderr,
// data goes to files, and outputs are a pure function of (inputs, flags,
// seed) so repeated runs are byte-identical.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "acts/acts.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonArgs {
  std::string model_path;
  std::string data_path;
  std::string out_dir;
  std::string attack = "fgsm";
  std::vector<double> eps;
  int steps = 0;         // 0 = method default
  double step_size = 0;  // 0 = method default
  int k = 10;
  std::string norm = "l2";
  int bins = 100;
  std::uint64_t seed = 0;
  int threads = 1;
};

std::ofstream open_output(const fs::path& dir, const std::string& name) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  fs::path file = dir / name;
  std::ofstream out(file);
  if (!out) throw acts::ValidationError("cannot write output file: " + file.string());
  return out;
}

std::vector<acts::AttackConfig> build_configs(const CommonArgs& args,
                                              const std::vector<double>& default_eps) {
  acts::AttackMethod method = acts::attack_method_from_name(args.attack);
  const std::vector<double>& eps = args.eps.empty() ? default_eps : args.eps;
  std::vector<acts::AttackConfig> cfgs;
  for (double e : eps) {
    acts::AttackConfig cfg;
    cfg.method = method;
    cfg.epsilon = e;
    cfg.steps = args.steps;
    cfg.step_size = args.step_size;
    cfg.seed = args.seed;
    cfgs.push_back(cfg);
  }
  return cfgs;
}

int clip_k(const CommonArgs& args, const acts::Network& net) {
  int max_k = static_cast<int>(net.num_classes()) - 1;
  if (args.k > max_k) {
    std::cerr << "note: k=" << args.k << " clipped to K-1=" << max_k << "\n";
    return max_k;
  }
  return args.k;
}

int cmd_train_toy(const std::string& out_dir, std::uint64_t seed, int grid_res, double eps) {
  acts::ToyResult toy = acts::run_toy_experiment(grid_res, eps, seed);
  std::cerr << "toy model test accuracy: " << toy.test_accuracy
            << " (seed " << toy.seed_used << ")\n";
  acts::save_model(toy.net, (fs::path(out_dir) / "model.json").string());
  auto grid = open_output(out_dir, "grid.csv");
  acts::write_toy_grid_csv(toy, grid);
  std::cerr << "wrote " << (fs::path(out_dir) / "model.json").string() << " and "
            << (fs::path(out_dir) / "grid.csv").string() << "\n";
  return 0;
}

int cmd_score(const CommonArgs& args) {
  acts::Network net = acts::load_model(args.model_path);
  acts::Dataset data = acts::load_dataset(args.data_path, net.num_inputs(), net.num_classes());
  // The paper probes ACTS with a small initial noise; 0.0002 is the default.
  std::vector<acts::AttackConfig> cfgs = build_configs(args, {0.0002});
  if (cfgs.size() != 1)
    throw acts::ValidationError("score: exactly one --eps value is expected");
  acts::AttackConfig cfg = cfgs.front().normalized();
  cfg.validate();
  int k = clip_k(args, net);
  acts::NormKind norm = acts::norm_kind_from_name(args.norm);

  std::size_t skipped = 0;
  std::size_t capped = 0;
  auto out = open_output(args.out_dir, "scores.csv");
  out << "sample_id,acts_score,winner\n";
  bool any = false;
  for (std::size_t row = 0; row < data.size(); ++row) {
    const acts::Vec& x = data.features[row];
    if (net.classify(x) != data.labels[row]) {
      ++skipped;
      continue;
    }
    acts::AttackConfig per_sample = cfg;
    per_sample.seed = cfg.seed + row;
    acts::AttackTrace trace = acts::run_attack(net, x, data.labels[row], per_sample);
    acts::Djm djm = net.input_jacobian(x);
    acts::SpeedVector speeds = acts::detail::speeds_from_trace(djm, trace, norm);
    acts::ActsResult res = acts::acts_score(net.forward(x), data.labels[row], speeds, k);
    if (res.capped) ++capped;
    out << data.ids[row] << ',' << acts::format_double(res.score) << ',' << res.winner << "\n";
    any = true;
  }
  if (!any)
    throw acts::ComputeError("score: empty cohort, no sample is correctly classified");
  if (skipped > 0) std::cerr << "note: skipped " << skipped << " misclassified sample(s)\n";
  if (capped > 0)
    std::cerr << "warning: " << capped << " sample(s) are capped (no closing direction)\n";
  return 0;
}

int cmd_attack(const CommonArgs& args) {
  acts::Network net = acts::load_model(args.model_path);
  acts::Dataset data = acts::load_dataset(args.data_path, net.num_inputs(), net.num_classes());
  std::vector<acts::AttackConfig> cfgs = build_configs(args, {0.00039});
  nlohmann::json out_json = nlohmann::json::array();
  for (const acts::AttackConfig& raw : cfgs) {
    acts::AttackConfig cfg = raw.normalized();
    cfg.validate();
    nlohmann::json traces = nlohmann::json::array();
    std::size_t successes = 0;
    for (std::size_t row = 0; row < data.size(); ++row) {
      if (net.classify(data.features[row]) != data.labels[row]) continue;
      acts::AttackConfig per_sample = cfg;
      per_sample.seed = cfg.seed + row;
      acts::AttackTrace trace = acts::run_attack(net, data.features[row], data.labels[row], per_sample);
      successes += trace.success ? 1 : 0;
      traces.push_back({{"sample_id", data.ids[row]}, {"trace", acts::trace_to_json(trace)}});
    }
    if (traces.empty())
      throw acts::ComputeError("attack: empty cohort, no sample is correctly classified");
    std::cerr << "epsilon " << cfg.epsilon << ": " << successes << "/" << traces.size()
              << " successful\n";
    out_json.push_back({{"epsilon", cfg.epsilon}, {"traces", std::move(traces)}});
  }
  auto out = open_output(args.out_dir, "traces.json");
  out << out_json.dump(2) << "\n";
  return 0;
}

int cmd_evaluate(const CommonArgs& args, bool per_level_speeds) {
  acts::Network net = acts::load_model(args.model_path);
  acts::Dataset data = acts::load_dataset(args.data_path, net.num_inputs(), net.num_classes());
  // Default noise levels: 0.1/255, 0.2/255, 0.3/255.
  std::vector<acts::AttackConfig> cfgs = build_configs(args, {0.00039, 0.00078, 0.00117});
  acts::ActsOptions opts;
  opts.k = clip_k(args, net);
  opts.norm = acts::norm_kind_from_name(args.norm);
  opts.bins = args.bins;
  opts.per_level_speeds = per_level_speeds;
  acts::EvalReport report = acts::run_experiment(net, data, cfgs, opts, args.threads);

  auto csv = open_output(args.out_dir, "report.csv");
  acts::write_report_csv(report, csv);
  nlohmann::json summary = acts::report_summary_json(report);
  summary["inputs"] = {{"model", args.model_path}, {"data", args.data_path}};
  auto js = open_output(args.out_dir, "summary.json");
  js << summary.dump(2) << "\n";
  std::cerr << "cohort " << report.records.size() << ", capped " << report.capped_count;
  if (report.mean_defined) std::cerr << ", mean ACTS " << report.mean_acts;
  std::cerr << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ACTS: adversarial converging time score toolkit"};
  app.require_subcommand(1);

  CommonArgs args;
  std::uint64_t toy_seed = 0;
  int toy_grid_res = 51;
  double toy_eps = 0.1;
  std::string toy_out;
  bool per_level_speeds = false;

  CLI::App* train = app.add_subcommand("train-toy", "Train the AND-gate toy model and emit its ACTS grid");
  train->add_option("--out", toy_out, "Output directory")->required();
  train->add_option("--seed", toy_seed, "Base seed")->capture_default_str();
  train->add_option("--grid-res", toy_grid_res, "Grid resolution per axis")->capture_default_str();
  train->add_option("--eps", toy_eps, "FGSM epsilon for the grid sweep")->capture_default_str();

  auto add_common = [&](CLI::App* cmd, bool needs_attack) {
    cmd->add_option("--model", args.model_path, "Model JSON file")->required();
    cmd->add_option("--data", args.data_path, "Dataset CSV file")->required();
    cmd->add_option("--out", args.out_dir, "Output directory")->required();
    if (needs_attack) {
      cmd->add_option("--attack", args.attack, "Attack method: fgsm|bim|pgd")
          ->check(CLI::IsMember({"fgsm", "bim", "pgd"}))
          ->capture_default_str();
      cmd->add_option("--eps", args.eps, "Epsilon level(s), strictly increasing");
      cmd->add_option("--steps", args.steps, "Attack steps (0 = method default)")
          ->capture_default_str();
      cmd->add_option("--step-size", args.step_size, "Per-step magnitude (0 = epsilon/2)")
          ->capture_default_str();
    }
    cmd->add_option("--seed", args.seed, "Base seed")->capture_default_str();
  };

  CLI::App* score = app.add_subcommand("score", "Per-sample ACTS scores");
  add_common(score, true);
  score->add_option("--k", args.k, "Candidate classes (clipped to K-1)")->capture_default_str();
  score->add_option("--norm", args.norm, "Speed norm: l2|linf")
      ->check(CLI::IsMember({"l2", "linf"}))
      ->capture_default_str();

  CLI::App* attack = app.add_subcommand("attack", "Emit full attack traces");
  add_common(attack, true);

  CLI::App* evaluate = app.add_subcommand("evaluate", "Score, attack at all levels, aggregate");
  add_common(evaluate, true);
  evaluate->add_option("--k", args.k, "Candidate classes (clipped to K-1)")->capture_default_str();
  evaluate->add_option("--norm", args.norm, "Speed norm: l2|linf")
      ->check(CLI::IsMember({"l2", "linf"}))
      ->capture_default_str();
  evaluate->add_option("--bins", args.bins, "Histogram bins for Overlap%")->capture_default_str();
  evaluate->add_option("--threads", args.threads, "Worker threads")->capture_default_str();
  evaluate->add_flag("--per-level-speeds", per_level_speeds,
                     "Recompute speeds from each level's trace instead of the lowest epsilon");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (train->parsed()) return cmd_train_toy(toy_out, toy_seed, toy_grid_res, toy_eps);
    if (score->parsed()) return cmd_score(args);
    if (attack->parsed()) return cmd_attack(args);
    if (evaluate->parsed()) return cmd_evaluate(args, per_level_speeds);
  } catch (const acts::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
