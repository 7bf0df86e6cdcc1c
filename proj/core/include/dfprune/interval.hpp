#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dfprune/network.hpp"

namespace dfprune {

/// Closed interval [lo, hi] over the reals, lo <= hi.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  constexpr Interval() = default;
  constexpr Interval(double lower, double upper) : lo(lower), hi(upper) {}
  static constexpr Interval point(double v) { return {v, v}; }

  constexpr double width() const { return hi - lo; }
  constexpr bool contains(double v) const { return lo <= v && v <= hi; }
  constexpr bool contains(const Interval& o) const { return lo <= o.lo && o.hi <= hi; }

  friend constexpr bool operator==(const Interval&, const Interval&) = default;
};

constexpr Interval operator+(const Interval& a, const Interval& b) { return {a.lo + b.lo, a.hi + b.hi}; }
constexpr Interval operator-(const Interval& a, const Interval& b) { return {a.lo - b.hi, a.hi - b.lo}; }
constexpr Interval operator*(double s, const Interval& a) {
  return s >= 0.0 ? Interval{s * a.lo, s * a.hi} : Interval{s * a.hi, s * a.lo};
}
constexpr Interval& operator+=(Interval& a, const Interval& b) { return a = a + b; }

Interval hull(const Interval& a, const Interval& b);
Interval intersect(const Interval& a, const Interval& b);

using IntervalVector = std::vector<Interval>;

IntervalVector operator+(const IntervalVector& a, const IntervalVector& b);

/// out_j = sum_i w(i, j) * in_i + bias_j, with `weights` row-major fan_in x fan_out.
/// An empty `bias` means no bias term.
IntervalVector interval_affine(std::span<const float> weights, std::span<const float> bias,
                               std::size_t fan_in, std::size_t fan_out, const IntervalVector& in);
IntervalVector interval_affine(const DenseLayer& layer, const IntervalVector& in);

/// Image of the interval under a monotone activation.
Interval interval_activation(ActivationKind kind, const Interval& in);
IntervalVector interval_activation(ActivationKind kind, const IntervalVector& in);

/// Sound enclosure of { act(p + d) - act(p) : p in pre, d in delta }.
/// Intersects the difference of images with the sign/slope bound of the
/// activation, which is exact for identity.
Interval activation_difference(ActivationKind kind, const Interval& pre, const Interval& delta);

}  // namespace dfprune
