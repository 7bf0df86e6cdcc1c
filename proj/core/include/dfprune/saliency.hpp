#pragma once

#include <cstddef>
#include <vector>

#include "dfprune/network.hpp"

namespace dfprune {

/// How the nominee's outgoing-weight sum is normalised in the first factor.
enum class SaliencyDenominator {
  count,  // mean outgoing weight
  l1,     // sum / sum of absolute values
};

struct SaliencyOptions {
  SaliencyDenominator denominator = SaliencyDenominator::count;
  double bias_epsilon = 1e-12;
};

struct CandidatePair {
  std::size_t layer = 0;
  std::size_t nominee = 0;
  std::size_t delegate = 0;
  double saliency = 0.0;

  friend bool operator==(const CandidatePair&, const CandidatePair&) = default;
};

/// Candidate pairs of one layer, ascending by saliency, ties by
/// (nominee, delegate).
using SaliencyList = std::vector<CandidatePair>;

/// Cost of replacing `nominee` by `delegate` at hidden layer `layer`:
///   mean(W_out[nominee, :]) * ( ||W_in[:, nominee] - W_in[:, delegate]||_2
///                               + |b_n - b_d| / (|b_n + b_d| + eps) )
/// Lower means safer to merge. The value can be negative.
double saliency(const Network& net, std::size_t layer, std::size_t nominee, std::size_t delegate,
                const SaliencyOptions& options = {});

/// Every ordered pair of distinct alive units, sorted.
SaliencyList saliency_list(const Network& net, std::size_t layer, const SaliencyOptions& options = {});

bool candidate_less(const CandidatePair& a, const CandidatePair& b);

}  // namespace dfprune
