#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dfprune/anneal.hpp"
#include "dfprune/bounds.hpp"
#include "dfprune/network.hpp"
#include "dfprune/saliency.hpp"

namespace dfprune {

enum class PruneMode { stochastic, one_shot };

std::string_view to_string(PruneMode mode);

struct PruningConfig {
  double target = 0.8;            // fraction of hidden units to remove
  double batch_fraction = 0.0156; // candidates considered per layer per epoch, relative to alive units
  EnergyWeights weights{};
  std::uint64_t seed = 42;
  std::size_t max_epochs = 1000;
  PruneMode mode = PruneMode::stochastic;
  SaliencyOptions saliency{};
};

void validate(const PruningConfig& cfg);

enum class PruneDecision { accepted, rejected, skipped_dead };

std::string_view to_string(PruneDecision decision);

struct PruneEvent {
  std::size_t epoch = 0;
  std::size_t layer = 0;
  std::size_t nominee = 0;
  std::size_t delegate = 0;
  double saliency = 0.0;
  // Annealing fields are absent for one-shot pruning and skipped pairs.
  std::optional<double> energy_prev;
  std::optional<double> energy_new;
  std::optional<double> temperature;
  std::optional<double> acceptance_rate;
  std::optional<double> random_draw;
  PruneDecision decision = PruneDecision::accepted;
};

struct EpochSummary {
  std::size_t epoch = 0;
  std::size_t units_pruned = 0;   // in this epoch
  std::size_t total_pruned = 0;   // dead hidden units after the epoch
  double sparsity = 0.0;
  double temperature = 1.0;
};

struct PruneTrace {
  PruningConfig config;
  std::vector<PruneEvent> events;
  std::vector<EpochSummary> epochs;
  bool target_reached = false;
};

inline constexpr std::string_view kTraceCsvHeader =
    "epoch,layer,nominee,delegate,saliency,energy_prev,energy_new,temperature,acceptance_rate,random_draw,decision";

std::string trace_to_csv(const PruneTrace& trace);

/// Removes `nominee` from hidden layer `layer` and folds its outgoing weights
/// into `delegate`'s.
void prune_pair(Network& net, std::size_t layer, std::size_t nominee, std::size_t delegate);

/// Re-applies the accepted events of a trace, in order, to `original`.
Network replay(const Network& original, const PruneTrace& trace);

/// Number of hidden units each layer is pruned towards, ceil(target * width),
/// leaving at least one unit alive.
std::vector<std::size_t> layer_targets(const Network& net, double target);
/// Number of hidden units the whole run removes, ceil(target * hidden units).
std::size_t global_target(const Network& net, double target);

/// Epoch-by-epoch driver of the annealing pruner. Owns the network, its
/// bounds map, the annealing state and the trace.
class StochasticPruner {
 public:
  StochasticPruner(Network net, PruningConfig cfg);

  /// True once the global target is met, max_epochs ran out, or no layer can
  /// be pruned further.
  bool done() const;
  bool target_reached() const;

  /// Runs one epoch over all hidden layers. Throws BoundsExplosion; the trace
  /// up to that point stays available.
  EpochSummary run_epoch();

  const Network& network() const { return net_; }
  const PruneTrace& trace() const { return trace_; }
  const AnnealState& state() const { return state_; }
  const BoundsMap& bounds() const { return bounds_; }
  double sparsity() const;
  std::size_t epochs_run() const { return epoch_; }

 private:
  std::size_t prune_layer(std::size_t layer);
  void update_temperature();
  bool layer_open(std::size_t layer) const;

  Network net_;
  PruningConfig cfg_;
  BoundsMap bounds_;
  AnnealState state_;
  PruneTrace trace_;
  std::vector<std::size_t> layer_targets_;
  std::vector<std::size_t> layer_pruned_;
  std::size_t units_targeted_ = 0;
  std::size_t units_pruned_ = 0;
  std::size_t epoch_ = 0;
};

struct PruneResult {
  Network network;
  PruneTrace trace;
};

/// Prunes with the annealing sampler until the target or max_epochs.
PruneResult run(Network net, const PruningConfig& cfg);

/// Greedy lowest-saliency pruning, one pass per layer, no randomness.
PruneResult one_shot_baseline(Network net, double target, const SaliencyOptions& options = {});

}  // namespace dfprune
