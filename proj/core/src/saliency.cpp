#include "dfprune/saliency.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dfprune/error.hpp"

namespace dfprune {
namespace {

void check_pair(const Network& net, std::size_t layer, std::size_t nominee, std::size_t delegate) {
  if (layer >= net.hidden_layer_count()) {
    throw PruneError("layer " + std::to_string(layer) + " is not a hidden layer");
  }
  const auto& hidden = net.layers[layer];
  if (nominee >= hidden.fan_out || delegate >= hidden.fan_out) throw PruneError("unit index out of range");
  if (nominee == delegate) throw PruneError("nominee and delegate must differ");
  if (!hidden.alive[nominee] || !hidden.alive[delegate]) throw PruneError("nominee or delegate is dead");
}

// First factor of the saliency, which depends on the nominee only.
double outgoing_factor(const DenseLayer& next, std::size_t nominee, SaliencyDenominator denominator) {
  double sum = 0.0;
  double abs_sum = 0.0;
  for (std::size_t k = 0; k < next.fan_out; ++k) {
    const double w = next.weight(nominee, k);
    sum += w;
    abs_sum += std::fabs(w);
  }
  if (denominator == SaliencyDenominator::count) return sum / static_cast<double>(next.fan_out);
  return abs_sum > 0.0 ? sum / abs_sum : 0.0;
}

double incoming_distance(const DenseLayer& hidden, std::size_t nominee, std::size_t delegate, double eps) {
  double sq = 0.0;
  for (std::size_t r = 0; r < hidden.fan_in; ++r) {
    const double d = static_cast<double>(hidden.weight(r, nominee)) - hidden.weight(r, delegate);
    sq += d * d;
  }
  const double bn = hidden.bias[nominee];
  const double bd = hidden.bias[delegate];
  return std::sqrt(sq) + std::fabs(bn - bd) / (std::fabs(bn + bd) + eps);
}

}  // namespace

bool candidate_less(const CandidatePair& a, const CandidatePair& b) {
  if (a.saliency != b.saliency) return a.saliency < b.saliency;
  if (a.nominee != b.nominee) return a.nominee < b.nominee;
  return a.delegate < b.delegate;
}

double saliency(const Network& net, std::size_t layer, std::size_t nominee, std::size_t delegate,
                const SaliencyOptions& options) {
  check_pair(net, layer, nominee, delegate);
  const auto& hidden = net.layers[layer];
  const auto& next = net.layers[layer + 1];
  return outgoing_factor(next, nominee, options.denominator) *
         incoming_distance(hidden, nominee, delegate, options.bias_epsilon);
}

SaliencyList saliency_list(const Network& net, std::size_t layer, const SaliencyOptions& options) {
  if (layer >= net.hidden_layer_count()) {
    throw PruneError("layer " + std::to_string(layer) + " is not a hidden layer");
  }
  const auto& hidden = net.layers[layer];
  const auto& next = net.layers[layer + 1];
  std::vector<std::size_t> alive;
  for (std::size_t j = 0; j < hidden.fan_out; ++j) {
    if (hidden.alive[j]) alive.push_back(j);
  }
  if (alive.size() < 2) throw PruneError("layer " + std::to_string(layer) + " has fewer than 2 alive units");

  SaliencyList list;
  list.reserve(alive.size() * (alive.size() - 1));
  for (std::size_t n : alive) {
    const double factor = outgoing_factor(next, n, options.denominator);
    for (std::size_t d : alive) {
      if (d == n) continue;
      list.push_back({layer, n, d, factor * incoming_distance(hidden, n, d, options.bias_epsilon)});
    }
  }
  std::sort(list.begin(), list.end(), candidate_less);
  return list;
}

}  // namespace dfprune
