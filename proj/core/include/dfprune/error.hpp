#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dfprune {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed model or dataset file (syntax, magic, version, truncation).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Dimension mismatch between layers, inputs, or datasets.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Non-finite parameter or intermediate value.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// An interval bound left the representable range while propagating through
/// the network. Carries the layer at which it happened.
class BoundsExplosion : public Error {
 public:
  BoundsExplosion(std::size_t layer, const std::string& what)
      : Error(what), layer_(layer) {}
  std::size_t layer() const noexcept { return layer_; }

 private:
  std::size_t layer_;
};

/// A bounds map no longer describes the network it is queried against.
class StaleBounds : public Error {
 public:
  using Error::Error;
};

/// Invalid pruning request (dead unit, output layer, i == j, ...).
class PruneError : public Error {
 public:
  using Error::Error;
};

}  // namespace dfprune
