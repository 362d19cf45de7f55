#include "bpo/optim/adam.hpp"

#include <cmath>

#include "bpo/error.hpp"

namespace bpo {

void AdamHyper::validate() const {
  if (!(lr > 0.0)) throw ConfigError("adam lr must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
    throw ConfigError("adam betas must lie in [0, 1)");
  if (!(eps > 0.0)) throw ConfigError("adam eps must be > 0");
}

void adam_update(PolicyParams& params, const GradientVector& ascent, AdamState& state, const AdamHyper& hyper) {
  const std::size_t n = params.size();
  if (ascent.size() != n) throw ContractViolation("adam: gradient size mismatch");
  if (state.m.empty()) state = AdamState(n);
  if (state.m.size() != n || state.v.size() != n) throw ContractViolation("adam: state size mismatch");
  if (!ascent.all_finite()) throw NonFiniteError("adam: non-finite gradient at step " + std::to_string(state.step));

  ++state.step;
  const double bc1 = 1.0 - std::pow(hyper.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(hyper.beta2, static_cast<double>(state.step));
  auto theta = params.flat();
  for (std::size_t i = 0; i < n; ++i) {
    const double g = ascent[i];
    state.m[i] = hyper.beta1 * state.m[i] + (1.0 - hyper.beta1) * g;
    state.v[i] = hyper.beta2 * state.v[i] + (1.0 - hyper.beta2) * g * g;
    const double mhat = state.m[i] / bc1;
    const double vhat = state.v[i] / bc2;
    theta[i] += hyper.lr * mhat / (std::sqrt(vhat) + hyper.eps);
  }
  if (!params.all_finite())
    throw NonFiniteError("adam: parameters became non-finite at step " + std::to_string(state.step));
}

}  // namespace bpo
