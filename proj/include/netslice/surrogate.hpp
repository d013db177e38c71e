#pragma once

#include <span>

// The contract the per-cell optimizer and the grid oracle search against:
// a differentiable per-slice satisfaction predictor x -> f(x, z) in [0,1].
// Implementations must be safe for concurrent read-only use.

namespace netslice {

class SliceQosModel {
 public:
  virtual ~SliceQosModel() = default;

  virtual double value(double x, std::span<const double> z) const = 0;

  // d value / d x at (x, z)
  virtual double gradient(double x, std::span<const double> z) const = 0;
};

}  // namespace netslice
