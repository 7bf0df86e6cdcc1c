#include "dfprune/pruner.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>

#include "dfprune/error.hpp"

namespace dfprune {
namespace {

constexpr double kTemperatureFloor = 1e-6;

// ceil() that ignores representation noise such as 0.6 * 20 = 12.000000000000002.
std::size_t ceil_count(double fraction, std::size_t n) {
  return static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
}

void append_number(std::string& out, double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

void append_optional(std::string& out, const std::optional<double>& v) {
  if (v) append_number(out, *v);
}

}  // namespace

std::string_view to_string(PruneMode mode) {
  return mode == PruneMode::stochastic ? "stochastic" : "one-shot";
}

std::string_view to_string(PruneDecision decision) {
  switch (decision) {
    case PruneDecision::accepted:
      return "accepted";
    case PruneDecision::rejected:
      return "rejected";
    case PruneDecision::skipped_dead:
      return "skipped_dead";
  }
  return "unknown";
}

void validate(const PruningConfig& cfg) {
  if (!(cfg.target > 0.0 && cfg.target < 1.0)) throw Error("target must lie in (0, 1)");
  if (!(cfg.batch_fraction > 0.0 && cfg.batch_fraction <= 1.0)) throw Error("batch fraction must lie in (0, 1]");
  if (cfg.max_epochs < 1) throw Error("max_epochs must be at least 1");
}

std::string trace_to_csv(const PruneTrace& trace) {
  std::string out(kTraceCsvHeader);
  out += '\n';
  for (const auto& e : trace.events) {
    out += std::to_string(e.epoch) + ',' + std::to_string(e.layer) + ',' + std::to_string(e.nominee) + ',' +
           std::to_string(e.delegate) + ',';
    append_number(out, e.saliency);
    out += ',';
    append_optional(out, e.energy_prev);
    out += ',';
    append_optional(out, e.energy_new);
    out += ',';
    append_optional(out, e.temperature);
    out += ',';
    append_optional(out, e.acceptance_rate);
    out += ',';
    append_optional(out, e.random_draw);
    out += ',';
    out += to_string(e.decision);
    out += '\n';
  }
  return out;
}

void prune_pair(Network& net, std::size_t layer, std::size_t nominee, std::size_t delegate) {
  if (layer >= net.hidden_layer_count()) {
    throw PruneError("layer " + std::to_string(layer) + " is not prunable (output or out of range)");
  }
  auto& hidden = net.layers[layer];
  auto& next = net.layers[layer + 1];
  if (nominee >= hidden.fan_out || delegate >= hidden.fan_out) throw PruneError("unit index out of range");
  if (nominee == delegate) throw PruneError("nominee and delegate must differ");
  if (!hidden.alive[nominee] || !hidden.alive[delegate]) throw PruneError("nominee or delegate is dead");

  for (std::size_t r = 0; r < hidden.fan_in; ++r) hidden.weight(r, nominee) = 0.0f;
  hidden.bias[nominee] = 0.0f;
  hidden.alive[nominee] = false;
  for (std::size_t k = 0; k < next.fan_out; ++k) {
    next.weight(delegate, k) += next.weight(nominee, k);
    next.weight(nominee, k) = 0.0f;
  }
  ++hidden.revision;
  ++next.revision;
}

Network replay(const Network& original, const PruneTrace& trace) {
  Network net = original;
  for (const auto& e : trace.events) {
    if (e.decision == PruneDecision::accepted) prune_pair(net, e.layer, e.nominee, e.delegate);
  }
  return net;
}

std::vector<std::size_t> layer_targets(const Network& net, double target) {
  std::vector<std::size_t> out;
  for (std::size_t l = 0; l < net.hidden_layer_count(); ++l) {
    const std::size_t width = net.layers[l].fan_out;
    out.push_back(std::min(ceil_count(target, width), width - 1));
  }
  return out;
}

std::size_t global_target(const Network& net, double target) {
  return ceil_count(target, net.hidden_unit_count());
}

StochasticPruner::StochasticPruner(Network net, PruningConfig cfg)
    : net_(std::move(net)), cfg_(cfg), state_(0, cfg.seed) {
  validate(net_);
  validate(cfg_);
  bounds_ = build_bounds_map(net_);
  state_ = AnnealState(net_.output_dim(), cfg_.seed);
  trace_.config = cfg_;
  layer_targets_ = layer_targets(net_, cfg_.target);
  units_targeted_ = std::max<std::size_t>(global_target(net_, cfg_.target), 1);
  // Units already dead in the input count towards the target.
  for (std::size_t l = 0; l < net_.hidden_layer_count(); ++l) {
    layer_pruned_.push_back(net_.layers[l].fan_out - net_.layers[l].alive_count());
  }
  units_pruned_ = net_.dead_hidden_unit_count();
  update_temperature();
}

bool StochasticPruner::target_reached() const { return units_pruned_ >= units_targeted_; }

bool StochasticPruner::layer_open(std::size_t layer) const {
  return layer_pruned_[layer] < layer_targets_[layer] && net_.layers[layer].alive_count() >= 2;
}

bool StochasticPruner::done() const {
  if (target_reached() || epoch_ >= cfg_.max_epochs) return true;
  for (std::size_t l = 0; l < net_.hidden_layer_count(); ++l) {
    if (layer_open(l)) return false;
  }
  return true;
}

double StochasticPruner::sparsity() const {
  return static_cast<double>(units_pruned_) / static_cast<double>(net_.hidden_unit_count());
}

void StochasticPruner::update_temperature() {
  const double remaining = 1.0 - static_cast<double>(units_pruned_) / static_cast<double>(units_targeted_);
  state_.temperature = std::max(kTemperatureFloor, std::min(state_.temperature, remaining));
}

std::size_t StochasticPruner::prune_layer(std::size_t layer) {
  const SaliencyList candidates = saliency_list(net_, layer, cfg_.saliency);
  state_.energy_prev = 0.0;
  const auto& hidden = net_.layers[layer];
  const std::size_t k = std::max<std::size_t>(1, ceil_count(cfg_.batch_fraction, hidden.alive_count()));

  std::size_t considered = 0;
  std::size_t accepted = 0;
  for (const auto& pair : candidates) {
    if (considered == k || !layer_open(layer) || target_reached()) break;
    PruneEvent event;
    event.epoch = epoch_;
    event.layer = layer;
    event.nominee = pair.nominee;
    event.delegate = pair.delegate;
    event.saliency = pair.saliency;
    if (!hidden.alive[pair.nominee] || !hidden.alive[pair.delegate]) {
      event.decision = PruneDecision::skipped_dead;
      trace_.events.push_back(event);
      continue;
    }
    ++considered;

    const IntervalVector impact = output_impact(net_, bounds_, layer, pair.nominee, pair.delegate);
    IntervalVector candidate_total = state_.cumulative_impact + impact;
    const double e = energy(candidate_total, cfg_.weights);
    event.energy_prev = state_.energy_prev;
    event.energy_new = e;
    event.temperature = state_.temperature;

    const Decision d = decide(state_, e);
    event.acceptance_rate = d.acceptance_rate;
    event.random_draw = d.random_draw;
    event.decision = d.accepted ? PruneDecision::accepted : PruneDecision::rejected;
    trace_.events.push_back(event);

    if (d.accepted) {
      prune_pair(net_, layer, pair.nominee, pair.delegate);
      state_.cumulative_impact = std::move(candidate_total);
      ++accepted;
      ++layer_pruned_[layer];
      ++units_pruned_;
    }
  }
  if (accepted > 0) refresh_bounds_in_place(net_, bounds_, layer);
  return accepted;
}

EpochSummary StochasticPruner::run_epoch() {
  ++epoch_;
  EpochSummary summary;
  summary.epoch = epoch_;
  for (std::size_t l = 0; l < net_.hidden_layer_count(); ++l) {
    if (target_reached()) break;
    if (layer_open(l)) summary.units_pruned += prune_layer(l);
    update_temperature();
  }
  summary.total_pruned = units_pruned_;
  summary.sparsity = sparsity();
  summary.temperature = state_.temperature;
  trace_.epochs.push_back(summary);
  trace_.target_reached = target_reached();
  return summary;
}

PruneResult run(Network net, const PruningConfig& cfg) {
  if (cfg.mode == PruneMode::one_shot) {
    validate(cfg);
    auto result = one_shot_baseline(std::move(net), cfg.target, cfg.saliency);
    result.trace.config = cfg;
    return result;
  }
  StochasticPruner pruner(std::move(net), cfg);
  while (!pruner.done()) pruner.run_epoch();
  return {pruner.network(), pruner.trace()};
}

PruneResult one_shot_baseline(Network net, double target, const SaliencyOptions& options) {
  validate(net);
  if (!(target >= 0.0 && target < 1.0)) throw Error("target must lie in [0, 1)");
  PruneResult result;
  result.trace.config.target = target;
  result.trace.config.mode = PruneMode::one_shot;
  result.trace.config.saliency = options;

  const auto targets = layer_targets(net, target);
  std::size_t pruned = 0;
  for (std::size_t l = 0; l < net.hidden_layer_count(); ++l) {
    const std::size_t already = net.layers[l].fan_out - net.layers[l].alive_count();
    if (already >= targets[l] || net.layers[l].alive_count() < 2) continue;
    std::size_t need = targets[l] - already;
    const SaliencyList candidates = saliency_list(net, l, options);
    for (const auto& pair : candidates) {
      if (need == 0) break;
      const auto& alive = net.layers[l].alive;
      if (!alive[pair.nominee] || !alive[pair.delegate]) continue;
      prune_pair(net, l, pair.nominee, pair.delegate);
      PruneEvent event;
      event.epoch = 1;
      event.layer = l;
      event.nominee = pair.nominee;
      event.delegate = pair.delegate;
      event.saliency = pair.saliency;
      event.decision = PruneDecision::accepted;
      result.trace.events.push_back(event);
      --need;
      ++pruned;
    }
  }
  EpochSummary summary;
  summary.epoch = 1;
  summary.units_pruned = pruned;
  summary.total_pruned = net.dead_hidden_unit_count();
  summary.sparsity = net.hidden_unit_count() ? static_cast<double>(summary.total_pruned) / net.hidden_unit_count() : 0.0;
  summary.temperature = 0.0;
  result.trace.epochs.push_back(summary);
  result.trace.target_reached = summary.total_pruned >= global_target(net, target);
  result.network = std::move(net);
  return result;
}

}  // namespace dfprune
