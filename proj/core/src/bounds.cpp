#include "dfprune/bounds.hpp"

#include <cmath>
#include <string>

#include "dfprune/error.hpp"

namespace dfprune {
namespace {

void check_finite(const IntervalVector& v, std::size_t layer, const char* what) {
  for (std::size_t k = 0; k < v.size(); ++k) {
    const auto& iv = v[k];
    if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi) || std::fabs(iv.lo) > kExplosionThreshold ||
        std::fabs(iv.hi) > kExplosionThreshold) {
      throw BoundsExplosion(layer, std::string(what) + " bound explosion at layer " + std::to_string(layer) +
                                       " unit " + std::to_string(k));
    }
  }
}

void compute_layer(const Network& net, BoundsMap& bounds, std::size_t l) {
  const auto& layer = net.layers[l];
  IntervalVector in;
  if (l == 0) {
    in.resize(net.input_dim);
    for (std::size_t i = 0; i < net.input_dim; ++i) in[i] = {net.input_lower[i], net.input_upper[i]};
  } else {
    in = bounds.post[l - 1];
  }
  auto pre = interval_affine(layer, in);
  check_finite(pre, l, "pre-activation");
  auto post = interval_activation(layer.activation, pre);
  for (std::size_t j = 0; j < layer.fan_out; ++j) {
    if (!layer.alive[j]) {
      pre[j] = {};
      post[j] = {};
    }
  }
  bounds.pre[l] = std::move(pre);
  bounds.post[l] = std::move(post);
  bounds.revisions[l] = layer.revision;
}

void check_shape(const Network& net, const BoundsMap& bounds) {
  if (bounds.pre.size() != net.layers.size() || bounds.post.size() != net.layers.size() ||
      bounds.revisions.size() != net.layers.size()) {
    throw StaleBounds("bounds map does not match the network's layer count");
  }
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    if (bounds.pre[l].size() != net.layers[l].fan_out || bounds.post[l].size() != net.layers[l].fan_out) {
      throw StaleBounds("bounds map width differs from layer " + std::to_string(l));
    }
  }
}

}  // namespace

BoundsMap build_bounds_map(const Network& net) {
  BoundsMap bounds;
  bounds.pre.resize(net.layers.size());
  bounds.post.resize(net.layers.size());
  bounds.revisions.resize(net.layers.size());
  for (std::size_t l = 0; l < net.layers.size(); ++l) compute_layer(net, bounds, l);
  return bounds;
}

void refresh_bounds_in_place(const Network& net, BoundsMap& bounds, std::size_t from_layer) {
  check_shape(net, bounds);
  for (std::size_t l = from_layer; l < net.layers.size(); ++l) compute_layer(net, bounds, l);
}

BoundsMap refresh_bounds(const Network& net, const BoundsMap& bounds, std::size_t from_layer) {
  BoundsMap out = bounds;
  refresh_bounds_in_place(net, out, from_layer);
  return out;
}

IntervalVector pruning_impact(const Network& net, const BoundsMap& bounds, std::size_t layer,
                              std::size_t nominee, std::size_t delegate) {
  check_shape(net, bounds);
  if (layer >= net.hidden_layer_count()) throw PruneError("layer " + std::to_string(layer) + " is not a hidden layer");
  const auto& hidden = net.layers[layer];
  if (nominee >= hidden.fan_out || delegate >= hidden.fan_out) throw PruneError("unit index out of range");
  if (nominee == delegate) throw PruneError("nominee and delegate must differ");
  if (!hidden.alive[nominee] || !hidden.alive[delegate]) throw PruneError("nominee or delegate is dead");
  // Layers feeding into `layer` must match what the map was built from.
  for (std::size_t l = 0; l < layer; ++l) {
    if (bounds.revisions[l] != net.layers[l].revision) {
      throw StaleBounds("bounds map is stale at layer " + std::to_string(l));
    }
  }

  const auto& next = net.layers[layer + 1];
  const Interval diff = bounds.post[layer][delegate] - bounds.post[layer][nominee];
  IntervalVector impact(next.fan_out);
  for (std::size_t k = 0; k < next.fan_out; ++k) {
    const double w = next.weight(nominee, k);
    impact[k] = w == 0.0 ? Interval{} : w * diff;
  }
  return impact;
}

IntervalVector propagate_post_impact(const Network& net, const BoundsMap& bounds, std::size_t layer,
                                     const IntervalVector& post_impact) {
  check_shape(net, bounds);
  if (layer >= net.layers.size()) throw ShapeError("propagate: layer index out of range");
  if (post_impact.size() != net.layers[layer].fan_out) throw ShapeError("propagate: impact width mismatch");
  if (layer + 1 == net.layers.size()) return post_impact;
  const auto& next = net.layers[layer + 1];
  // Biases cancel in the difference.
  auto pre_impact = interval_affine(next.weights, {}, next.fan_in, next.fan_out, post_impact);
  return propagate_impact(net, bounds, layer + 1, pre_impact);
}

IntervalVector propagate_impact(const Network& net, const BoundsMap& bounds, std::size_t layer,
                                const IntervalVector& pre_impact) {
  check_shape(net, bounds);
  IntervalVector delta = pre_impact;
  for (std::size_t m = layer; m < net.layers.size(); ++m) {
    const auto& current = net.layers[m];
    if (delta.size() != current.fan_out) throw ShapeError("propagate: impact width mismatch");
    IntervalVector post(current.fan_out);
    for (std::size_t k = 0; k < current.fan_out; ++k) {
      if (!current.alive[k]) continue;
      post[k] = activation_difference(current.activation, bounds.pre[m][k], delta[k]);
    }
    check_finite(post, m, "impact");
    if (m + 1 == net.layers.size()) return post;
    const auto& next = net.layers[m + 1];
    delta = interval_affine(next.weights, {}, next.fan_in, next.fan_out, post);
  }
  return delta;
}

IntervalVector output_impact(const Network& net, const BoundsMap& bounds, std::size_t layer,
                             std::size_t nominee, std::size_t delegate) {
  return propagate_impact(net, bounds, layer + 1, pruning_impact(net, bounds, layer, nominee, delegate));
}

}  // namespace dfprune
