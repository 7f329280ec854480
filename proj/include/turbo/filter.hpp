#pragma once

#include <cstddef>
#include <string>

#include "turbo/linalg.hpp"

namespace turbo {

/// Filtered estimate of x_l after processing y_l.
struct StepEstimate {
  Vector x_lin;  // estimate of x_L
  Vector x_non;  // estimate of x_N
};

/// Common driver interface used by the benchmark harness. A filter holds the
/// prediction for step l and advances to l + 1 on every call to step().
class Filter {
 public:
  virtual ~Filter() = default;
  virtual StepEstimate step(std::size_t l, const Vector& y) = 0;
  virtual std::string name() const = 0;
};

}  // namespace turbo
