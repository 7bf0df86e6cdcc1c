#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "dfprune/error.hpp"
#include "dfprune/evaluation.hpp"
#include "dfprune/model_io.hpp"
#include "dfprune/parallel.hpp"
#include "dfprune/pruner.hpp"

namespace dfprune::cli {
namespace {

using Clock = std::chrono::steady_clock;
using ordered_json = nlohmann::ordered_json;

struct PruneFlags {
  std::string model;
  std::string out;
  std::string trace;
  std::string manifest;
  double target = 0.8;
  double batch = 0.0156;
  std::string alpha = "auto";
  double phi = 0.9;
  std::uint64_t seed = 42;
  std::string mode = "stochastic";
  std::size_t max_epochs = 1000;
  std::string denominator = "count";
};

struct EvalFlags {
  std::string dataset;
  std::vector<double> epsilons{0.01, 0.05};
  std::string craft_on = "pruned";
  std::size_t topk = 0;
  bool no_clip = false;
};

void add_prune_flags(CLI::App& cmd, PruneFlags& f) {
  cmd.add_option("--model", f.model, "Pre-trained model (JSON)")->required();
  cmd.add_option("--out", f.out, "Output path of the pruned, compacted model")->required();
  cmd.add_option("--target", f.target, "Fraction of hidden units to prune")->check(CLI::Range(0.0, 1.0));
  cmd.add_option("--batch", f.batch, "Candidates per layer and epoch, as a fraction of alive units")
      ->check(CLI::Range(0.0, 1.0));
  cmd.add_option("--alpha", f.alpha, "Weight of the scale metric, or 'auto'");
  cmd.add_option("--phi", f.phi, "Similarity threshold")->check(CLI::Range(0.0, 1.0));
  cmd.add_option("--seed", f.seed, "Random seed");
  cmd.add_option("--mode", f.mode, "stochastic | one-shot")->check(CLI::IsMember({"stochastic", "one-shot"}));
  cmd.add_option("--trace", f.trace, "Trace CSV path (default: <out>.trace.csv)");
  cmd.add_option("--manifest", f.manifest, "Run manifest path (default: <out>.manifest.json)");
  cmd.add_option("--max-epochs", f.max_epochs, "Epoch cap")->check(CLI::PositiveNumber);
  cmd.add_option("--saliency-denominator", f.denominator, "count | l1")->check(CLI::IsMember({"count", "l1"}));
}

void add_eval_flags(CLI::App& cmd, EvalFlags& f, bool dataset_required) {
  auto* ds = cmd.add_option("--dataset", f.dataset, "Labelled dataset (NNDS)");
  if (dataset_required) ds->required();
  cmd.add_option("--epsilon", f.epsilons, "FGSM budgets, comma separated")->delimiter(',');
  cmd.add_option("--craft-on", f.craft_on, "Model the adversary attacks: pruned | original")
      ->check(CLI::IsMember({"pruned", "original"}));
  cmd.add_option("--topk", f.topk, "Also report top-k preservation (0 = off)");
  cmd.add_flag("--no-clip", f.no_clip, "Do not clip adversarial inputs to the input bounds");
}

double resolve_alpha(const std::string& alpha, const Network& net) {
  if (alpha != "auto") {
    try {
      std::size_t used = 0;
      const double v = std::stod(alpha, &used);
      if (used != alpha.size()) throw std::invalid_argument(alpha);
      return v;
    } catch (const std::exception&) {
      throw CLI::ValidationError("--alpha", "expected a number or 'auto', got '" + alpha + "'");
    }
  }
  std::size_t sigmoid = 0;
  std::size_t relu = 0;
  for (std::size_t l = 0; l < net.hidden_layer_count(); ++l) {
    if (net.layers[l].activation == ActivationKind::sigmoid) ++sigmoid;
    if (net.layers[l].activation == ActivationKind::relu) ++relu;
  }
  return sigmoid > relu ? 0.05 : 0.75;
}

PruningConfig make_config(const PruneFlags& f, const Network& net) {
  PruningConfig cfg;
  cfg.target = f.target;
  cfg.batch_fraction = f.batch;
  cfg.weights = EnergyWeights(resolve_alpha(f.alpha, net), f.phi);
  cfg.seed = f.seed;
  cfg.max_epochs = f.max_epochs;
  cfg.mode = f.mode == "one-shot" ? PruneMode::one_shot : PruneMode::stochastic;
  cfg.saliency.denominator = f.denominator == "l1" ? SaliencyDenominator::l1 : SaliencyDenominator::count;
  validate(cfg);
  return cfg;
}

AttackConfig make_attack(const EvalFlags& f, double epsilon) {
  AttackConfig a;
  a.epsilon = epsilon;
  a.clip = !f.no_clip;
  a.craft_on = f.craft_on == "original" ? CraftTarget::original : CraftTarget::pruned;
  return a;
}

std::string default_path(const std::string& explicit_path, const std::string& out, const char* suffix) {
  return explicit_path.empty() ? out + suffix : explicit_path;
}

ordered_json config_json(const PruningConfig& cfg) {
  ordered_json j;
  j["target"] = cfg.target;
  j["batch_fraction"] = cfg.batch_fraction;
  j["alpha"] = cfg.weights.alpha();
  j["beta"] = cfg.weights.beta();
  j["phi"] = cfg.weights.phi();
  j["seed"] = cfg.seed;
  j["max_epochs"] = cfg.max_epochs;
  j["mode"] = std::string(to_string(cfg.mode));
  j["saliency_denominator"] = cfg.saliency.denominator == SaliencyDenominator::l1 ? "l1" : "count";
  return j;
}

void write_manifest(const std::string& path, const std::string& command, ordered_json config,
                    ordered_json inputs, ordered_json outputs, std::uint64_t seed, Clock::time_point start) {
  const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
  ordered_json m;
  m["command"] = command;
  m["config"] = std::move(config);
  m["inputs"] = std::move(inputs);
  m["outputs"] = std::move(outputs);
  m["seed"] = seed;
  m["duration_seconds"] = std::max(seconds, 1e-9);
  m["engine_version"] = kEngineVersion;
  write_file_atomic(path, m.dump(2) + "\n");
}

double sparsity_against(const Network& original, const Network& pruned) {
  const std::size_t total = original.hidden_unit_count();
  std::size_t alive = 0;
  for (std::size_t l = 0; l < pruned.hidden_layer_count(); ++l) alive += pruned.layers[l].alive_count();
  return total ? 1.0 - static_cast<double>(alive) / static_cast<double>(total) : 0.0;
}

int cmd_prune(const PruneFlags& f, std::size_t threads, std::ostream& out, std::ostream& err) {
  (void)threads;
  const auto start = Clock::now();
  const Network original = load_network(f.model);
  const PruningConfig cfg = make_config(f, original);
  const std::string trace_path = default_path(f.trace, f.out, ".trace.csv");
  const std::string manifest_path = default_path(f.manifest, f.out, ".manifest.json");

  PruneResult result;
  if (cfg.mode == PruneMode::one_shot) {
    result = run(original, cfg);
  } else {
    StochasticPruner pruner(original, cfg);
    try {
      while (!pruner.done()) pruner.run_epoch();
    } catch (const BoundsExplosion& e) {
      write_file_atomic(trace_path, trace_to_csv(pruner.trace()));
      err << "error: " << e.what() << " (partial trace written to " << trace_path << ")\n";
      return kExitExplosion;
    }
    result = {pruner.network(), pruner.trace()};
  }

  Network compacted = compact(result.network);
  save_network(compacted, f.out);
  write_file_atomic(trace_path, trace_to_csv(result.trace));

  ordered_json summary;
  summary["target_reached"] = result.trace.target_reached;
  summary["epochs"] = result.trace.epochs.size();
  summary["pruned_units"] = result.network.dead_hidden_unit_count();
  summary["hidden_units"] = result.network.hidden_unit_count();
  summary["sparsity"] = sparsity_against(original, compacted);
  auto config = config_json(cfg);
  config["result"] = summary;
  write_manifest(manifest_path, "prune", config, {{"model", f.model}},
                 {{"model", f.out}, {"trace", trace_path}}, cfg.seed, start);

  out << "pruned " << result.network.dead_hidden_unit_count() << "/" << result.network.hidden_unit_count()
      << " hidden units in " << result.trace.epochs.size() << " epoch(s)"
      << (result.trace.target_reached ? "" : " (target not reached)") << " -> " << f.out << "\n";
  return kExitOk;
}

int cmd_eval(const std::string& original_path, const std::string& pruned_path, const std::string& out_path,
             const std::string& model_name, const EvalFlags& f, std::size_t threads, std::ostream& out) {
  const auto start = Clock::now();
  const Network original = load_network(original_path);
  const Network pruned = load_network(pruned_path);
  const LabeledDataset ds = load_dataset(f.dataset);
  const double sparsity = sparsity_against(original, pruned);
  const std::string name = model_name.empty() ? (pruned.name.empty() ? pruned_path : pruned.name) : model_name;

  std::string csv(kReportCsvHeader);
  csv += '\n';
  for (double eps : f.epsilons) {
    const auto report = evaluate_pair(original, pruned, ds, make_attack(f, eps), f.topk, threads);
    csv += report_csv_row(name, sparsity, report) + '\n';
    if (report.degenerate) out << "warning: pruned model predicts a single class (epsilon " << eps << ")\n";
  }
  write_file_atomic(out_path, csv);
  ordered_json config;
  config["epsilon"] = f.epsilons;
  config["craft_on"] = f.craft_on;
  config["clip"] = !f.no_clip;
  config["topk"] = f.topk;
  write_manifest(out_path + ".manifest.json", "eval", config,
                 {{"original", original_path}, {"pruned", pruned_path}, {"dataset", f.dataset}}, {{"report", out_path}},
                 0, start);
  out << "wrote " << f.epsilons.size() << " report row(s) to " << out_path << "\n";
  return kExitOk;
}

class SweepWriter {
 public:
  SweepWriter(const std::string& path, const Network& original, const LabeledDataset& ds, const EvalFlags& flags,
              std::size_t threads)
      : file_(path, std::ios::trunc), original_(original), ds_(ds), flags_(flags), threads_(threads) {
    if (!file_) throw Error("cannot write " + path);
    file_ << "epoch," << kReportCsvHeader << '\n' << std::flush;
  }

  void evaluate(std::size_t epoch, const std::string& mode, const Network& pruned, double sparsity) {
    for (double eps : flags_.epsilons) {
      const auto report = evaluate_pair(original_, pruned, ds_, make_attack(flags_, eps), flags_.topk, threads_);
      file_ << epoch << ',' << report_csv_row(mode, sparsity, report) << '\n';
    }
    // Rows stay valid if the run is interrupted.
    file_.flush();
  }

 private:
  std::ofstream file_;
  const Network& original_;
  const LabeledDataset& ds_;
  const EvalFlags& flags_;
  std::size_t threads_;
};

int cmd_sweep(const PruneFlags& f, const EvalFlags& e, const std::string& csv_path, std::size_t eval_every,
              std::size_t threads, std::ostream& out, std::ostream& err) {
  const auto start = Clock::now();
  const Network original = load_network(f.model);
  const PruningConfig cfg = make_config(f, original);
  const LabeledDataset ds = load_dataset(e.dataset);
  const std::string trace_path = default_path(f.trace, f.out, ".trace.csv");
  const std::string manifest_path = default_path(f.manifest, f.out, ".manifest.json");
  const std::string mode(to_string(cfg.mode));
  const double hidden = static_cast<double>(original.hidden_unit_count());

  SweepWriter writer(csv_path, original, ds, e, threads);
  writer.evaluate(0, mode, original, 0.0);

  PruneResult result;
  std::size_t checkpoints = 1;
  if (cfg.mode == PruneMode::one_shot) {
    // One-shot pruning has no epochs; evaluate it on a sparsity grid with
    // the stochastic run's per-epoch step.
    const double step = cfg.batch_fraction * static_cast<double>(eval_every) *
                        static_cast<double>(original.hidden_layer_count());
    for (std::size_t i = 1;; ++i) {
      const double t = std::min(cfg.target, step * static_cast<double>(i));
      result = one_shot_baseline(original, t, cfg.saliency);
      result.trace.config = cfg;
      writer.evaluate(i, mode, result.network, result.network.dead_hidden_unit_count() / hidden);
      ++checkpoints;
      if (t >= cfg.target) break;
    }
  } else {
    StochasticPruner pruner(original, cfg);
    try {
      while (!pruner.done()) {
        const auto summary = pruner.run_epoch();
        if (summary.epoch % eval_every == 0 || pruner.done()) {
          writer.evaluate(summary.epoch, mode, pruner.network(), pruner.sparsity());
          ++checkpoints;
        }
      }
    } catch (const BoundsExplosion& ex) {
      write_file_atomic(trace_path, trace_to_csv(pruner.trace()));
      err << "error: " << ex.what() << " (partial trace written to " << trace_path << ")\n";
      return kExitExplosion;
    }
    result = {pruner.network(), pruner.trace()};
  }

  save_network(compact(result.network), f.out);
  write_file_atomic(trace_path, trace_to_csv(result.trace));
  auto config = config_json(cfg);
  config["epsilon"] = e.epsilons;
  config["craft_on"] = e.craft_on;
  config["eval_every"] = eval_every;
  write_manifest(manifest_path, "sweep", config, {{"model", f.model}, {"dataset", e.dataset}},
                 {{"model", f.out}, {"trace", trace_path}, {"sweep", csv_path}}, cfg.seed, start);
  out << "sweep wrote " << checkpoints << " checkpoint(s) to " << csv_path << "\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Data-free, robustness-aware pruning of dense networks", "dfprune"};
  app.require_subcommand(1);
  std::size_t threads_flag = 0;
  app.add_option("--threads", threads_flag, "Worker threads (0 = DFPRUNE_THREADS or hardware)");

  PruneFlags prune_flags;
  auto* prune = app.add_subcommand("prune", "Prune hidden units to a sparsity target");
  add_prune_flags(*prune, prune_flags);

  EvalFlags eval_flags;
  std::string original_path;
  std::string pruned_path;
  std::string eval_out;
  std::string model_name;
  auto* eval = app.add_subcommand("eval", "Compare accuracy and FGSM robustness of two models");
  eval->add_option("--original", original_path, "Original model")->required();
  eval->add_option("--pruned", pruned_path, "Pruned model")->required();
  eval->add_option("--out", eval_out, "Report CSV path")->required();
  eval->add_option("--name", model_name, "Value of the model column");
  add_eval_flags(*eval, eval_flags, true);

  PruneFlags sweep_prune;
  EvalFlags sweep_eval;
  std::string sweep_csv;
  std::size_t eval_every = 1;
  auto* sweep = app.add_subcommand("sweep", "Prune epoch by epoch and evaluate along the way");
  add_prune_flags(*sweep, sweep_prune);
  add_eval_flags(*sweep, sweep_eval, true);
  sweep->add_option("--csv", sweep_csv, "Long-form metrics CSV (default: <out>.sweep.csv)");
  sweep->add_option("--eval-every", eval_every, "Evaluate every N epochs")->check(CLI::PositiveNumber);

  for (auto* cmd : {prune, eval, sweep}) {
    cmd->add_option("--threads", threads_flag, "Worker threads (0 = DFPRUNE_THREADS or hardware)");
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const CLI::App* active = &app;
    for (auto* sub : app.get_subcommands()) active = sub;
    err << active->help();
    return kExitUsage;
  }

  const std::size_t threads = resolve_thread_count(threads_flag);
  try {
    if (prune->parsed()) return cmd_prune(prune_flags, threads, out, err);
    if (eval->parsed()) return cmd_eval(original_path, pruned_path, eval_out, model_name, eval_flags, threads, out);
    if (sweep->parsed()) {
      const std::string csv = sweep_csv.empty() ? sweep_prune.out + ".sweep.csv" : sweep_csv;
      return cmd_sweep(sweep_prune, sweep_eval, csv, eval_every, threads, out, err);
    }
  } catch (const BoundsExplosion& e) {
    err << "error: " << e.what() << "\n";
    return kExitExplosion;
  } catch (const CLI::Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace dfprune::cli
