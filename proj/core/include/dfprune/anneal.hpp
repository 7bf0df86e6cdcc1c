#pragma once

#include <cstdint>
#include <optional>
#include <random>

#include "dfprune/interval.hpp"

namespace dfprune {

/// Blend of the scale and entropy metrics. beta is always 1 - alpha.
class EnergyWeights {
 public:
  explicit EnergyWeights(double alpha = 0.75, double phi = 0.9);

  double alpha() const { return alpha_; }
  double beta() const { return 1.0 - alpha_; }
  double phi() const { return phi_; }

 private:
  double alpha_;
  double phi_;
};

double logistic(double x);

/// Sum of interval widths.
double norm_metric(const IntervalVector& dv);

/// Similarity of two intervals relative to the global range [m_minus, m_plus]
/// of the list they come from; 1 for identical intervals, 0 for the extreme
/// pair. A degenerate range (m_plus == m_minus) yields 1.
double similarity(const Interval& a, const Interval& b, double m_minus, double m_plus);

/// Fraction of the *other* intervals in `u` that are phi-similar to u[i],
/// divided by |u| (not |u| - 1).
double density(const IntervalVector& u, std::size_t i, double phi);

/// Shannon entropy (natural log) of the phi-similarity densities; 0 ln 0 = 0.
double entropy_metric(const IntervalVector& u, double phi);

/// alpha * logistic(NORM) + beta * logistic(ENT).
double energy(const IntervalVector& dv, const EnergyWeights& weights);

/// min(1, exp(-(energy_new - energy_prev) / temperature)).
double acceptance_rate(double energy_new, double energy_prev, double temperature);

/// Uniform draw in [0, 1) from the top 53 bits of one generator output.
double uniform_draw(std::mt19937_64& rng);

struct AnnealState {
  explicit AnnealState(std::size_t output_width, std::uint64_t seed);

  double temperature = 1.0;
  double energy_prev = 0.0;
  IntervalVector cumulative_impact;
  std::mt19937_64 rng;
};

struct Decision {
  bool accepted = false;
  double acceptance_rate = 1.0;
  std::optional<double> random_draw;
};

/// Metropolis step. Accepts unconditionally when nothing has been accepted
/// yet in this layer (energy_prev == 0) or the energy does not increase;
/// otherwise draws u and accepts iff u < P. Updates energy_prev on accept.
Decision decide(AnnealState& state, double energy_new);

}  // namespace dfprune
