#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dfprune {

enum class ActivationKind { relu, sigmoid, identity };

std::string_view to_string(ActivationKind kind);
ActivationKind parse_activation(std::string_view name);

double activate(ActivationKind kind, double x);

/// Fully connected layer. Weights are stored row-major with shape
/// fan_in x fan_out, so weight(i, j) connects input unit i to output unit j.
/// A dead unit has a zero weight column, zero bias and a zero outgoing row in
/// the next layer.
struct DenseLayer {
  std::size_t fan_in = 0;
  std::size_t fan_out = 0;
  std::vector<float> weights;
  std::vector<float> bias;
  ActivationKind activation = ActivationKind::relu;
  std::vector<bool> alive;
  // Bumped on every in-place mutation; not serialized. Lets a bounds map
  // detect that it was built for an older version of the layer.
  std::uint64_t revision = 0;

  DenseLayer() = default;
  DenseLayer(std::size_t in, std::size_t out, ActivationKind act);

  float& weight(std::size_t i, std::size_t j) { return weights[i * fan_out + j]; }
  float weight(std::size_t i, std::size_t j) const { return weights[i * fan_out + j]; }

  std::size_t alive_count() const;
};

bool same_parameters(const DenseLayer& a, const DenseLayer& b);

struct Network {
  std::string name;
  int format_version = 1;
  std::size_t input_dim = 0;
  // Per-feature input box used by the interval analysis.
  std::vector<float> input_lower;
  std::vector<float> input_upper;
  // Whether the bounds were written as a single scalar pair; preserved so a
  // save/load cycle reproduces the original file layout.
  bool scalar_input_bounds = true;
  std::vector<DenseLayer> layers;

  std::size_t output_dim() const { return layers.empty() ? 0 : layers.back().fan_out; }
  /// Hidden layers are every layer but the last.
  std::size_t hidden_layer_count() const { return layers.empty() ? 0 : layers.size() - 1; }
  std::size_t hidden_unit_count() const;
  std::size_t dead_hidden_unit_count() const;
  std::size_t parameter_count() const;
};

bool same_parameters(const Network& a, const Network& b);

/// Throws ShapeError / NumericError / FormatError when any structural
/// invariant is violated.
void validate(const Network& net);

/// Sets all input bounds to [lower, upper].
void set_uniform_input_bounds(Network& net, float lower, float upper);

/// Per-layer values of one concrete forward pass, in double precision.
struct ForwardTrace {
  std::vector<std::vector<double>> pre;
  std::vector<std::vector<double>> post;
};

ForwardTrace forward_trace(const Network& net, std::span<const float> x);

/// Output logits. Accumulation happens in double over the stored 32-bit
/// parameters; the result is rounded back to 32-bit.
std::vector<float> forward(const Network& net, std::span<const float> x);

/// Index of the largest logit, lowest index on ties.
std::size_t argmax(std::span<const float> logits);

/// Physically removes dead hidden units.
Network compact(const Network& net);

}  // namespace dfprune
