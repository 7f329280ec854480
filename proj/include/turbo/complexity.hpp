#pragma once

#include <cstddef>

namespace turbo {

struct ComplexityInputs {
  std::size_t d = 4;
  std::size_t d_l = 2;
  std::size_t d_n = 2;
  std::size_t p = 3;
  std::size_t n_p = 100;
  std::size_t n_it = 1;
};

/// Approximate flop counts per recursion of the turbo filter and of the MPF.
struct ComplexityEstimate {
  double n_tf = 0.0;
  double n_mpf = 0.0;
};

ComplexityEstimate complexity_estimate(const ComplexityInputs& c);

}  // namespace turbo
