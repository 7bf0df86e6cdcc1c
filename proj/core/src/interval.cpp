#include "dfprune/interval.hpp"

#include <algorithm>
#include <cmath>

#include "dfprune/error.hpp"

namespace dfprune {

Interval hull(const Interval& a, const Interval& b) {
  return {std::min(a.lo, b.lo), std::max(a.hi, b.hi)};
}

Interval intersect(const Interval& a, const Interval& b) {
  return {std::max(a.lo, b.lo), std::min(a.hi, b.hi)};
}

IntervalVector operator+(const IntervalVector& a, const IntervalVector& b) {
  if (a.size() != b.size()) throw ShapeError("interval vector length mismatch");
  IntervalVector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

IntervalVector interval_affine(std::span<const float> weights, std::span<const float> bias,
                               std::size_t fan_in, std::size_t fan_out, const IntervalVector& in) {
  if (in.size() != fan_in || weights.size() != fan_in * fan_out || (!bias.empty() && bias.size() != fan_out)) {
    throw ShapeError("interval_affine: dimension mismatch");
  }
  IntervalVector out(fan_out);
  if (!bias.empty()) {
    for (std::size_t j = 0; j < fan_out; ++j) out[j] = Interval::point(bias[j]);
  }
  for (std::size_t i = 0; i < fan_in; ++i) {
    const Interval x = in[i];
    if (x.lo == 0.0 && x.hi == 0.0) continue;
    const float* row = weights.data() + i * fan_out;
    for (std::size_t j = 0; j < fan_out; ++j) {
      const double w = row[j];
      if (w >= 0.0) {
        out[j].lo += w * x.lo;
        out[j].hi += w * x.hi;
      } else {
        out[j].lo += w * x.hi;
        out[j].hi += w * x.lo;
      }
    }
  }
  return out;
}

IntervalVector interval_affine(const DenseLayer& layer, const IntervalVector& in) {
  return interval_affine(layer.weights, layer.bias, layer.fan_in, layer.fan_out, in);
}

Interval interval_activation(ActivationKind kind, const Interval& in) {
  return {activate(kind, in.lo), activate(kind, in.hi)};
}

IntervalVector interval_activation(ActivationKind kind, const IntervalVector& in) {
  IntervalVector out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = interval_activation(kind, in[i]);
  return out;
}

namespace {

double sigmoid_slope(double x) {
  const double s = 1.0 / (1.0 + std::exp(-x));
  return s * (1.0 - s);
}

// Largest slope of the activation over [lo, hi].
double max_slope(ActivationKind kind, const Interval& range) {
  switch (kind) {
    case ActivationKind::identity:
      return 1.0;
    case ActivationKind::relu:
      return range.hi > 0.0 ? 1.0 : 0.0;
    case ActivationKind::sigmoid: {
      const double nearest_zero = std::clamp(0.0, range.lo, range.hi);
      return sigmoid_slope(nearest_zero);
    }
  }
  return 1.0;
}

}  // namespace

Interval activation_difference(ActivationKind kind, const Interval& pre, const Interval& delta) {
  if (kind == ActivationKind::identity) return delta;
  const Interval perturbed = pre + delta;
  const Interval images = interval_activation(kind, perturbed) - interval_activation(kind, pre);
  // Monotone activations move in the direction of the perturbation, by at most
  // slope * |delta|.
  const double slope = max_slope(kind, hull(pre, perturbed));
  const Interval slope_bound{std::min(0.0, slope * delta.lo), std::max(0.0, slope * delta.hi)};
  Interval out = intersect(images, slope_bound);
  if (out.lo > out.hi) out = slope_bound;
  return out;
}

}  // namespace dfprune
