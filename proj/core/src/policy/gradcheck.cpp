#include "bpo/policy/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "bpo/error.hpp"
#include "bpo/rng.hpp"

namespace bpo {

FdReport finite_difference_check(const PolicyParams& params, const ScalarObjective& objective, double fd_step,
                                 std::size_t coords, std::uint64_t seed) {
  GradientVector analytic(params.size());
  const double base = objective(params, &analytic);
  if (!std::isfinite(base)) throw NonFiniteError("objective is not finite at the check point");

  std::vector<std::size_t> order(params.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (coords < order.size()) {
    Rng rng = make_rng(seed, Stream::kTest);
    std::shuffle(order.begin(), order.end(), rng);
    order.resize(coords);
    std::sort(order.begin(), order.end());
  }

  FdReport report;
  PolicyParams probe = params;
  for (std::size_t i : order) {
    const double saved = probe.flat()[i];
    probe.flat()[i] = saved + fd_step;
    const double up = objective(probe, nullptr);
    probe.flat()[i] = saved - fd_step;
    const double down = objective(probe, nullptr);
    probe.flat()[i] = saved;
    if (!std::isfinite(up) || !std::isfinite(down))
      throw NonFiniteError("objective not finite at coordinate " + std::to_string(i));

    const double numeric = (up - down) / (2.0 * fd_step);
    const double a = analytic[i];
    const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
    const double rel = std::abs(a - numeric) / denom;
    ++report.coords_checked;
    if (rel > report.max_rel_error) {
      report.max_rel_error = rel;
      report.worst_coord = i;
      report.worst_analytic = a;
      report.worst_numeric = numeric;
    }
  }
  return report;
}

}  // namespace bpo
