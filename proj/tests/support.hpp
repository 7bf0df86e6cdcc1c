#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include "dfprune/anneal.hpp"
#include "dfprune/interval.hpp"
#include "dfprune/network.hpp"

namespace dfprune::test {

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(DFPRUNE_FIXTURE_DIR) / name;
}

inline std::filesystem::path test_data(const std::string& name) {
  return std::filesystem::path(DFPRUNE_TEST_DATA_DIR) / name;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Fresh, empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& tag) {
  auto dir = std::filesystem::temp_directory_path() / ("dfprune_test_" + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Fully connected net with the given widths (widths[0] = input_dim), weights
/// uniform in [-scale, scale], input box [0, 1]. Output layer is identity.
inline Network random_network(const std::vector<std::size_t>& widths, ActivationKind hidden, std::mt19937_64& rng,
                              double scale = 1.0) {
  std::uniform_real_distribution<double> w(-scale, scale);
  Network net;
  net.name = "random";
  net.input_dim = widths.front();
  set_uniform_input_bounds(net, 0.0f, 1.0f);
  for (std::size_t l = 1; l < widths.size(); ++l) {
    const bool last = l + 1 == widths.size();
    DenseLayer layer(widths[l - 1], widths[l], last ? ActivationKind::identity : hidden);
    for (auto& v : layer.weights) v = static_cast<float>(w(rng));
    for (auto& v : layer.bias) v = static_cast<float>(w(rng));
    net.layers.push_back(std::move(layer));
  }
  return net;
}

inline std::vector<float> random_input(const Network& net, std::mt19937_64& rng) {
  std::vector<float> x(net.input_dim);
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::uniform_real_distribution<float> d(net.input_lower[i], net.input_upper[i]);
    x[i] = d(rng);
  }
  return x;
}

/// v lies in iv up to floating-point slack.
inline bool within(const Interval& iv, double v) {
  const double slack = 1e-9 * (1.0 + std::abs(v));
  return iv.lo - slack <= v && v <= iv.hi + slack;
}

inline IntervalVector random_interval_vector(std::mt19937_64& rng, std::size_t max_len = 10) {
  std::uniform_int_distribution<std::size_t> len(1, max_len);
  std::uniform_real_distribution<double> v(-3.0, 3.0);
  std::bernoulli_distribution dup(0.3);
  IntervalVector out(len(rng));
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (i > 0 && dup(rng)) {
      out[i] = out[i - 1];
      continue;
    }
    const double a = v(rng), b = v(rng);
    out[i] = {std::min(a, b), std::max(a, b)};
  }
  return out;
}

// Brute-force oracles for the annealing metrics, written from the formulas
// without sharing code with the engine.
namespace oracle {

inline double sigma(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline double norm(const IntervalVector& u) {
  double s = 0.0;
  for (const auto& iv : u) s += iv.hi - iv.lo;
  return s;
}

inline std::vector<std::vector<double>> similarity_matrix(const IntervalVector& u) {
  double m_minus = u[0].lo, m_plus = u[0].hi;
  for (const auto& iv : u) {
    m_minus = std::min(m_minus, iv.lo);
    m_plus = std::max(m_plus, iv.hi);
  }
  std::vector<std::vector<double>> sim(u.size(), std::vector<double>(u.size(), 1.0));
  if (m_plus == m_minus) return sim;
  for (std::size_t i = 0; i < u.size(); ++i) {
    for (std::size_t j = 0; j < u.size(); ++j) {
      const double d = std::abs(u[i].lo - u[j].lo) + std::abs(u[i].hi - u[j].hi);
      sim[i][j] = 1.0 - 0.5 * d / (m_plus - m_minus);
    }
  }
  return sim;
}

inline std::vector<double> densities(const IntervalVector& u, double phi) {
  const auto sim = similarity_matrix(u);
  std::vector<double> rho(u.size(), 0.0);
  for (std::size_t i = 0; i < u.size(); ++i) {
    int peers = 0;
    for (std::size_t j = 0; j < u.size(); ++j) peers += (j != i && sim[i][j] >= phi) ? 1 : 0;
    rho[i] = static_cast<double>(peers) / static_cast<double>(u.size());
  }
  return rho;
}

inline double entropy(const IntervalVector& u, double phi) {
  double h = 0.0;
  for (double p : densities(u, phi)) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

inline double energy(const IntervalVector& u, double alpha, double phi) {
  return alpha * sigma(norm(u)) + (1.0 - alpha) * sigma(entropy(u, phi));
}

inline double acceptance(double e_new, double e_prev, double t) {
  const double p = std::exp(-(e_new - e_prev) / t);
  return p > 1.0 ? 1.0 : p;
}

}  // namespace oracle
}  // namespace dfprune::test
