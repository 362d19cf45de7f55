#pragma once

#include <cstdint>
#include <vector>

#include "bpo/policy/policy.hpp"

namespace bpo {

struct AdamHyper {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void validate() const;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t step = 0;

  AdamState() = default;
  explicit AdamState(std::size_t size) : m(size, 0.0), v(size, 0.0) {}
};

// Bias-corrected Adam step that *ascends* along `ascent`. Minimizing a loss
// means passing its negated gradient. Throws NonFiniteError on a non-finite
// gradient or if the update leaves a non-finite parameter.
void adam_update(PolicyParams& params, const GradientVector& ascent, AdamState& state, const AdamHyper& hyper);

}  // namespace bpo
