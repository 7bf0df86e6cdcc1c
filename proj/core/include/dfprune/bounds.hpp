#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "dfprune/interval.hpp"
#include "dfprune/network.hpp"

namespace dfprune {

/// Pre- and post-activation intervals of every unit, obtained by pushing the
/// network's input box through all layers.
struct BoundsMap {
  std::vector<IntervalVector> pre;
  std::vector<IntervalVector> post;
  // Layer revisions the map was computed from.
  std::vector<std::uint64_t> revisions;
};

/// Magnitude above which a bound is treated as an explosion.
inline constexpr double kExplosionThreshold = 1e30;

BoundsMap build_bounds_map(const Network& net);

/// Recomputes layers [from_layer, end) after the network changed at
/// from_layer; earlier layers are copied unchanged.
BoundsMap refresh_bounds(const Network& net, const BoundsMap& bounds, std::size_t from_layer);
void refresh_bounds_in_place(const Network& net, BoundsMap& bounds, std::size_t from_layer);

/// Change in the pre-activation of every unit of layer l+1 caused by merging
/// nominee i into delegate j at hidden layer l: w(l+1)_{i,k} * (a_j - a_i).
IntervalVector pruning_impact(const Network& net, const BoundsMap& bounds, std::size_t layer,
                              std::size_t nominee, std::size_t delegate);

/// Pushes a perturbation of layer `layer`'s pre-activations to the output
/// layer. Returns the perturbation of the output values.
IntervalVector propagate_impact(const Network& net, const BoundsMap& bounds, std::size_t layer,
                                const IntervalVector& pre_impact);

/// Same, starting from a perturbation of layer `layer`'s post-activations.
IntervalVector propagate_post_impact(const Network& net, const BoundsMap& bounds, std::size_t layer,
                                     const IntervalVector& post_impact);

/// pruning_impact followed by propagate_impact.
IntervalVector output_impact(const Network& net, const BoundsMap& bounds, std::size_t layer,
                             std::size_t nominee, std::size_t delegate);

}  // namespace dfprune
