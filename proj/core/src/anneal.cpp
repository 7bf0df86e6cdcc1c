#include "dfprune/anneal.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dfprune/error.hpp"

namespace dfprune {

EnergyWeights::EnergyWeights(double alpha, double phi) : alpha_(alpha), phi_(phi) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error("alpha must lie in [0, 1]");
  if (!(phi >= 0.0 && phi <= 1.0)) throw Error("phi must lie in [0, 1]");
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double norm_metric(const IntervalVector& dv) {
  double sum = 0.0;
  for (const auto& u : dv) sum += std::fabs(u.hi - u.lo);
  return sum;
}

double similarity(const Interval& a, const Interval& b, double m_minus, double m_plus) {
  const double range = m_plus - m_minus;
  if (!(range > 0.0)) return 1.0;
  const double s = 1.0 - 0.5 * (std::fabs(a.lo - b.lo) + std::fabs(a.hi - b.hi)) / range;
  return std::clamp(s, 0.0, 1.0);
}

namespace {

void require_nonempty(const IntervalVector& u) {
  if (u.empty()) throw Error("similarity density needs a non-empty interval vector");
}

std::pair<double, double> global_range(const IntervalVector& u) {
  double lo = u.front().lo;
  double hi = u.front().hi;
  for (const auto& v : u) {
    lo = std::min(lo, v.lo);
    hi = std::max(hi, v.hi);
  }
  return {lo, hi};
}

std::size_t similar_peers(const IntervalVector& u, std::size_t i, double phi, double m_minus, double m_plus) {
  std::size_t count = 0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    if (j != i && similarity(u[i], u[j], m_minus, m_plus) >= phi) ++count;
  }
  return count;
}

}  // namespace

double density(const IntervalVector& u, std::size_t i, double phi) {
  require_nonempty(u);
  if (i >= u.size()) throw Error("density: index out of range");
  const auto [m_minus, m_plus] = global_range(u);
  return static_cast<double>(similar_peers(u, i, phi, m_minus, m_plus)) / static_cast<double>(u.size());
}

double entropy_metric(const IntervalVector& u, double phi) {
  require_nonempty(u);
  const auto [m_minus, m_plus] = global_range(u);
  double ent = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double rho =
        static_cast<double>(similar_peers(u, i, phi, m_minus, m_plus)) / static_cast<double>(u.size());
    if (rho > 0.0) ent -= rho * std::log(rho);
  }
  return ent;
}

double energy(const IntervalVector& dv, const EnergyWeights& weights) {
  return weights.alpha() * logistic(norm_metric(dv)) + weights.beta() * logistic(entropy_metric(dv, weights.phi()));
}

double acceptance_rate(double energy_new, double energy_prev, double temperature) {
  if (!(temperature > 0.0)) throw Error("acceptance_rate: temperature must be positive");
  if (energy_new <= energy_prev) return 1.0;
  return std::exp(-(energy_new - energy_prev) / temperature);
}

double uniform_draw(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

AnnealState::AnnealState(std::size_t output_width, std::uint64_t seed)
    : cumulative_impact(output_width), rng(seed) {}

Decision decide(AnnealState& state, double energy_new) {
  Decision d;
  if (state.energy_prev > 0.0 && energy_new > state.energy_prev) {
    d.acceptance_rate = acceptance_rate(energy_new, state.energy_prev, state.temperature);
    d.random_draw = uniform_draw(state.rng);
    d.accepted = *d.random_draw < d.acceptance_rate;
  } else {
    d.accepted = true;
  }
  if (d.accepted) state.energy_prev = energy_new;
  return d;
}

}  // namespace dfprune
