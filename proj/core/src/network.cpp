#include "dfprune/network.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dfprune/error.hpp"

namespace dfprune {

std::string_view to_string(ActivationKind kind) {
  switch (kind) {
    case ActivationKind::relu:
      return "relu";
    case ActivationKind::sigmoid:
      return "sigmoid";
    case ActivationKind::identity:
      return "identity";
  }
  return "unknown";
}

ActivationKind parse_activation(std::string_view name) {
  if (name == "relu") return ActivationKind::relu;
  if (name == "sigmoid") return ActivationKind::sigmoid;
  if (name == "identity") return ActivationKind::identity;
  throw FormatError("unknown activation '" + std::string(name) + "'");
}

double activate(ActivationKind kind, double x) {
  switch (kind) {
    case ActivationKind::relu:
      return x > 0.0 ? x : 0.0;
    case ActivationKind::sigmoid:
      return 1.0 / (1.0 + std::exp(-x));
    case ActivationKind::identity:
      return x;
  }
  return x;
}

DenseLayer::DenseLayer(std::size_t in, std::size_t out, ActivationKind act)
    : fan_in(in),
      fan_out(out),
      weights(in * out, 0.0f),
      bias(out, 0.0f),
      activation(act),
      alive(out, true) {}

std::size_t DenseLayer::alive_count() const {
  return static_cast<std::size_t>(std::count(alive.begin(), alive.end(), true));
}

bool same_parameters(const DenseLayer& a, const DenseLayer& b) {
  return a.fan_in == b.fan_in && a.fan_out == b.fan_out && a.activation == b.activation &&
         a.weights == b.weights && a.bias == b.bias && a.alive == b.alive;
}

bool same_parameters(const Network& a, const Network& b) {
  if (a.input_dim != b.input_dim || a.input_lower != b.input_lower ||
      a.input_upper != b.input_upper || a.layers.size() != b.layers.size()) {
    return false;
  }
  for (std::size_t l = 0; l < a.layers.size(); ++l) {
    if (!same_parameters(a.layers[l], b.layers[l])) return false;
  }
  return true;
}

std::size_t Network::hidden_unit_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < hidden_layer_count(); ++l) n += layers[l].fan_out;
  return n;
}

std::size_t Network::dead_hidden_unit_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < hidden_layer_count(); ++l) {
    n += layers[l].fan_out - layers[l].alive_count();
  }
  return n;
}

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers) n += layer.weights.size() + layer.bias.size();
  return n;
}

void set_uniform_input_bounds(Network& net, float lower, float upper) {
  net.input_lower.assign(net.input_dim, lower);
  net.input_upper.assign(net.input_dim, upper);
  net.scalar_input_bounds = true;
}

void validate(const Network& net) {
  if (net.format_version != 1) {
    throw FormatError("unsupported format_version " + std::to_string(net.format_version));
  }
  if (net.input_dim == 0) throw ShapeError("input_dim must be positive");
  if (net.layers.size() < 2) throw ShapeError("network needs at least one hidden layer");
  if (net.input_lower.size() != net.input_dim || net.input_upper.size() != net.input_dim) {
    throw ShapeError("input_bounds length does not match input_dim");
  }
  for (std::size_t i = 0; i < net.input_dim; ++i) {
    if (!std::isfinite(net.input_lower[i]) || !std::isfinite(net.input_upper[i])) {
      throw NumericError("non-finite input bound at feature " + std::to_string(i));
    }
    if (net.input_lower[i] > net.input_upper[i]) {
      throw ShapeError("input bound lower > upper at feature " + std::to_string(i));
    }
  }

  std::size_t expected_in = net.input_dim;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& layer = net.layers[l];
    const std::string where = "layer " + std::to_string(l);
    if (layer.fan_out == 0) throw ShapeError(where + " has no units");
    if (layer.fan_in != expected_in) {
      throw ShapeError(where + " fan_in " + std::to_string(layer.fan_in) +
                       " does not match previous width " + std::to_string(expected_in));
    }
    if (layer.weights.size() != layer.fan_in * layer.fan_out || layer.bias.size() != layer.fan_out ||
        layer.alive.size() != layer.fan_out) {
      throw ShapeError(where + " parameter arrays do not match its shape");
    }
    const bool is_output = l + 1 == net.layers.size();
    if (layer.activation == ActivationKind::identity && !is_output) {
      throw FormatError(where + ": identity activation is only allowed on the output layer");
    }
    for (float w : layer.weights) {
      if (!std::isfinite(w)) throw NumericError(where + " has a non-finite weight");
    }
    for (float b : layer.bias) {
      if (!std::isfinite(b)) throw NumericError(where + " has a non-finite bias");
    }
    if (is_output && layer.alive_count() != layer.fan_out) {
      throw ShapeError("output layer units cannot be pruned");
    }
    for (std::size_t j = 0; j < layer.fan_out; ++j) {
      if (layer.alive[j]) continue;
      bool null = layer.bias[j] == 0.0f;
      for (std::size_t i = 0; i < layer.fan_in && null; ++i) null = layer.weight(i, j) == 0.0f;
      if (!is_output) {
        const auto& next = net.layers[l + 1];
        for (std::size_t k = 0; k < next.fan_out && null; ++k) null = next.weight(j, k) == 0.0f;
      }
      if (!null) {
        throw ShapeError(where + " dead unit " + std::to_string(j) + " has non-zero parameters");
      }
    }
    expected_in = layer.fan_out;
  }
}

ForwardTrace forward_trace(const Network& net, std::span<const float> x) {
  if (x.size() != net.input_dim) {
    throw ShapeError("input has " + std::to_string(x.size()) + " features, model expects " +
                     std::to_string(net.input_dim));
  }
  ForwardTrace trace;
  trace.pre.reserve(net.layers.size());
  trace.post.reserve(net.layers.size());
  std::vector<double> a(x.begin(), x.end());
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& layer = net.layers[l];
    std::vector<double> z(layer.bias.begin(), layer.bias.end());
    for (std::size_t i = 0; i < layer.fan_in; ++i) {
      const double ai = a[i];
      if (ai == 0.0) continue;
      const float* row = &layer.weights[i * layer.fan_out];
      for (std::size_t j = 0; j < layer.fan_out; ++j) z[j] += static_cast<double>(row[j]) * ai;
    }
    std::vector<double> out(layer.fan_out);
    for (std::size_t j = 0; j < layer.fan_out; ++j) {
      if (!std::isfinite(z[j])) {
        throw NumericError("non-finite activation at layer " + std::to_string(l) + " unit " +
                           std::to_string(j));
      }
      out[j] = layer.alive[j] ? activate(layer.activation, z[j]) : 0.0;
    }
    trace.pre.push_back(std::move(z));
    a = out;
    trace.post.push_back(std::move(out));
  }
  return trace;
}

std::vector<float> forward(const Network& net, std::span<const float> x) {
  const auto trace = forward_trace(net, x);
  const auto& out = trace.post.back();
  return {out.begin(), out.end()};
}

std::size_t argmax(std::span<const float> logits) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < logits.size(); ++k) {
    if (logits[k] > logits[best]) best = k;
  }
  return best;
}

Network compact(const Network& net) {
  validate(net);
  Network out = net;
  for (std::size_t l = 0; l < net.hidden_layer_count(); ++l) {
    const auto& layer = out.layers[l];
    std::vector<std::size_t> keep;
    for (std::size_t j = 0; j < layer.fan_out; ++j) {
      if (layer.alive[j]) keep.push_back(j);
    }
    if (keep.size() == layer.fan_out) continue;

    // A fully pruned layer keeps one zero unit so the shape chain stays valid.
    const std::size_t width = std::max<std::size_t>(keep.size(), 1);
    DenseLayer shrunk(layer.fan_in, width, layer.activation);
    for (std::size_t c = 0; c < keep.size(); ++c) {
      for (std::size_t i = 0; i < layer.fan_in; ++i) shrunk.weight(i, c) = layer.weight(i, keep[c]);
      shrunk.bias[c] = layer.bias[keep[c]];
    }
    if (keep.empty()) shrunk.alive[0] = true;

    const auto& next = out.layers[l + 1];
    DenseLayer next_shrunk(width, next.fan_out, next.activation);
    next_shrunk.bias = next.bias;
    next_shrunk.alive = next.alive;
    for (std::size_t c = 0; c < keep.size(); ++c) {
      for (std::size_t k = 0; k < next.fan_out; ++k) next_shrunk.weight(c, k) = next.weight(keep[c], k);
    }
    out.layers[l] = std::move(shrunk);
    out.layers[l + 1] = std::move(next_shrunk);
  }
  return out;
}

}  // namespace dfprune
