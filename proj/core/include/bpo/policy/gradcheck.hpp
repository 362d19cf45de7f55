#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

#include "bpo/policy/policy.hpp"

namespace bpo {

// Returns the objective value; when `grad` is non-null it also receives the
// analytic gradient (same layout as the params).
using ScalarObjective = std::function<double(const PolicyParams&, GradientVector*)>;

struct FdReport {
  double max_rel_error = 0.0;
  std::size_t coords_checked = 0;
  std::size_t worst_coord = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

// Central differences on a random subsample of coordinates (all of them when
// the model is smaller than `coords`). Relative error uses the denominator
// max(|analytic|, |numeric|, 1e-8).
FdReport finite_difference_check(const PolicyParams& params, const ScalarObjective& objective,
                                 double fd_step = 1e-5, std::size_t coords = 256, std::uint64_t seed = 7);

}  // namespace bpo
