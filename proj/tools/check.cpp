#include "check.hpp"

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "bpo/anneal/sft.hpp"
#include "bpo/optim/objective.hpp"
#include "bpo/optim/rl.hpp"
#include "bpo/policy/gradcheck.hpp"

namespace bpo::tools {

namespace {

struct Tally {
  std::ostream& out;
  int failures = 0;

  void report(const std::string& name, bool ok, const std::string& detail) {
    out << (ok ? "PASS  " : "FAIL  ") << name << "  " << detail << '\n';
    if (!ok) ++failures;
  }
};

PolicyDims small_dims() {
  PolicyDims d;
  d.window = 6;
  d.embed = 5;
  d.hidden = 7;
  return d;
}

std::vector<TaskInstance> tasks(std::uint64_t seed, int n) {
  Rng rng = make_rng(seed, Stream::kTest, 0);
  TaskSpec spec;
  spec.max_steps = 3;
  std::vector<TaskInstance> out;
  for (int i = 0; i < n; ++i) out.push_back(sample_task(rng, spec));
  return out;
}

}  // namespace

int run_checks(std::uint64_t seed, std::ostream& out) {
  Tally tally{out};
  const PolicyDims dims = small_dims();
  const PolicyParams params = init_params(seed, dims);
  const auto fd_line = [](const FdReport& r) {
    return "max_rel_err=" + std::to_string(r.max_rel_error) + " coords=" + std::to_string(r.coords_checked);
  };

  {
    Rng rng = make_rng(seed, Stream::kTest, 1);
    const Rollout r = generate_rollout(params, tasks(seed, 1)[0], Mode::Auto, GenConfig{}, rng);
    std::vector<double> w(r.tokens.size() - r.prompt_len);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = uniform01(rng) - 0.5;
    const ScalarObjective obj = [&](const PolicyParams& p, GradientVector* g) {
      const auto lp = logprob_sequence(p, r.tokens, r.prompt_len, r.masks);
      double v = 0.0;
      for (std::size_t i = 0; i < lp.size(); ++i) v += w[i] * lp[i];
      if (g != nullptr) *g = weighted_logprob_grad(p, r.tokens, r.prompt_len, r.masks, w);
      return v;
    };
    const FdReport rep = finite_difference_check(params, obj, 1e-5, 256, seed);
    tally.report("grad.weighted_logprob", rep.max_rel_error <= 1e-4, fd_line(rep));
  }
  {
    std::vector<CurationItem> items;
    int i = 0;
    for (const auto& t : tasks(seed, 6))
      items.push_back(build_item(t, (i++ % 2) != 0 ? ModeLabel::Direct : ModeLabel::Reasoning, Heuristic::Difficulty));
    const ScalarObjective obj = [&](const PolicyParams& p, GradientVector* g) { return sft_loss(p, items, g); };
    const FdReport rep = finite_difference_check(params, obj, 1e-5, 256, seed);
    tally.report("grad.sft_loss", rep.max_rel_error <= 1e-4, fd_line(rep));
  }
  {
    BpoConfig cfg;
    cfg.g = 2;
    Rng rng = make_rng(seed, Stream::kTest, 2);
    RolloutGroup group = generate_bimode_group(params, tasks(seed, 1)[0], cfg.g, GenConfig{}, rng);
    group.thinking[0].reward = 1.0;
    group.nonthinking[1].reward = 1.0;
    assign_bimode_advantages(group, cfg);
    const ReferenceSnapshot ref{init_params(seed + 1, dims), "ref"};
    PolicyParams theta = params;
    for (auto& v : theta.flat()) v += 0.05 * (uniform01(rng) - 0.5);
    const std::vector<RolloutGroup> groups{group};
    const ScalarObjective obj = [&](const PolicyParams& p, GradientVector* g) {
      ObjectiveBreakdown b = bpo_objective(p, ref, groups, cfg, g != nullptr);
      if (g != nullptr) *g = std::move(b.gradient);
      return b.total;
    };
    const FdReport rep = finite_difference_check(theta, obj, 1e-5, 256, seed);
    tally.report("grad.bpo_objective", rep.max_rel_error <= 1e-4, fd_line(rep));
  }
  {
    const std::vector<double> rewards{1, 1, 0, 0};
    // std = 0.5 doubles the relative effect of the floor; 1e-7 keeps it below 1e-6.
    const auto adv = group_advantages(rewards, AdvantageScope::Combined, 1e-7);
    double err = 0.0;
    const double expect[] = {1, 1, -1, -1};
    for (std::size_t i = 0; i < adv.size(); ++i) err = std::max(err, std::abs(adv[i] - expect[i]));
    tally.report("advantage.hand_example", err <= 1e-6, "max_abs_err=" + std::to_string(err));
    const std::vector<double> flat{0.5, 0.5, 0.5, 0.5};
    bool zero = true;
    for (double a : group_advantages(flat, AdvantageScope::Combined, 1e-6)) zero = zero && a == 0.0;
    tally.report("advantage.constant_rewards", zero, "");
  }
  {
    const double v = kl_token(0.0, std::log(2.0));
    tally.report("kl.hand_value", std::abs(v - 0.30685) <= 1e-5, "kl=" + std::to_string(v));
    tally.report("kl.equal_is_zero", kl_token(-1.3, -1.3) == 0.0, "");
  }
  {
    BpoConfig cfg;
    Rng rng = make_rng(seed, Stream::kTest, 3);
    std::vector<Rollout> flat;
    for (const auto& t : tasks(seed, 8)) {
      const RolloutGroup group = generate_bimode_group(params, t, cfg.g, GenConfig{}, rng);
      const std::vector<RolloutGroup> one{group};
      const auto f = flatten_groups(one);
      flat.insert(flat.end(), f.begin(), f.end());
    }
    const std::size_t v = bimode_violations(flat, cfg.g);
    tally.report("bimode.structure", v == 0, "violations=" + std::to_string(v));
  }
  return tally.failures;
}

}  // namespace bpo::tools
