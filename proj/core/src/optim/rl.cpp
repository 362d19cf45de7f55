#include "bpo/optim/rl.hpp"

#include <algorithm>
#include <cmath>

#include "bpo/error.hpp"

namespace bpo {

std::string_view to_string(Algo algo) { return algo == Algo::Bpo ? "bpo" : "grpo"; }

Algo parse_algo(std::string_view text) {
  if (text == "bpo") return Algo::Bpo;
  if (text == "grpo") return Algo::Grpo;
  throw ConfigError("unknown algo '" + std::string(text) + "' (expected bpo|grpo)");
}

TaskInstance TaskSource::draw(Rng& rng) const {
  for (int attempt = 0; attempt < 100000; ++attempt) {
    TaskInstance t = sample_task(rng, spec);
    if (!excluded.contains(t.expression())) return t;
  }
  throw ContractViolation("task source: held-out set covers the whole task distribution");
}

std::vector<TaskInstance> TaskSource::draw_batch(Rng& rng, std::size_t n) const {
  std::vector<TaskInstance> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(draw(rng));
  return out;
}

std::size_t bimode_violations(std::span<const Rollout> rollouts, int g) {
  const auto block = static_cast<std::size_t>(2 * g);
  std::size_t bad = 0;
  if (rollouts.size() % block != 0) ++bad;
  for (std::size_t start = 0; start + block <= rollouts.size(); start += block) {
    std::size_t thinking = 0, nonthinking = 0;
    for (std::size_t k = start; k < start + block; ++k) {
      const Rollout& r = rollouts[k];
      if (r.directive == Mode::Thinking) {
        ++thinking;
        if (r.realized != Mode::Thinking || r.think_body_len() < 1) ++bad;
        if (k >= start + static_cast<std::size_t>(g)) ++bad;  // thinking block comes first
      } else if (r.directive == Mode::NonThinking) {
        ++nonthinking;
        if (r.realized != Mode::NonThinking || r.think_body_len() != 0) ++bad;
      } else {
        ++bad;
      }
      if (!(r.task == rollouts[start].task)) ++bad;
    }
    if (thinking != static_cast<std::size_t>(g) || nonthinking != static_cast<std::size_t>(g)) ++bad;
  }
  return bad;
}

namespace {

void fill_batch_stats(MetricsRecord& rec, std::span<const Rollout> rollouts, std::size_t queries) {
  double think_n = 0, nothink_n = 0, think_ok = 0, nothink_ok = 0, tokens = 0;
  for (const Rollout& r : rollouts) {
    tokens += static_cast<double>(r.generated().size());
    if (r.realized == Mode::Thinking) {
      ++think_n;
      think_ok += r.reward;
    } else {
      ++nothink_n;
      nothink_ok += r.reward;
    }
  }
  const double q = static_cast<double>(queries);
  rec.think_items = think_n / q;
  rec.nothink_items = nothink_n / q;
  rec.think_correct_items = think_ok / q;
  rec.nothink_correct_items = nothink_ok / q;
  if (think_n > 0) rec.reward_think = think_ok / think_n;
  if (nothink_n > 0) rec.reward_nothink = nothink_ok / nothink_n;
  const double n = static_cast<double>(rollouts.size());
  rec.minority_share = n > 0 ? std::min(think_n, nothink_n) / n : 0.0;
  rec.mean_tokens = n > 0 ? tokens / n : 0.0;
}

}  // namespace

RlResult rl_train(const PolicyParams& init, const RlSetup& setup, const MetricsSink& sink) {
  const BpoConfig& cfg = setup.cfg;
  cfg.validate();
  setup.gen.validate();
  setup.tasks.spec.validate();

  RlResult result{init, {}};
  PolicyParams& params = result.params;
  const ReferenceSnapshot ref{init, "post-sft"};
  AdamState adam(params.size());
  const auto queries = static_cast<std::size_t>(cfg.batch_queries);

  for (std::int64_t step = 1; step <= cfg.iters; ++step) {
    MetricsRecord rec;
    rec.step = step;
    rec.algo = std::string(to_string(setup.algo));

    if (setup.probe.size() > 0 && ((step - 1) % cfg.probe_every == 0 || step == cfg.iters)) {
      const std::size_t len = setup.gen.max_gen_len;
      rec.probe = ProbeMetrics::from(evaluate(params, setup.probe, Mode::Thinking, len),
                                     evaluate(params, setup.probe, Mode::NonThinking, len),
                                     evaluate(params, setup.probe, Mode::Auto, len));
    }

    Rng task_rng = make_rng(setup.seed, Stream::kRlTasks, static_cast<std::uint64_t>(step));
    const std::vector<TaskInstance> tasks = setup.tasks.draw_batch(task_rng, queries);
    const std::uint64_t offset = static_cast<std::uint64_t>(step) * queries;

    std::vector<Rollout> batch;
    if (setup.algo == Algo::Bpo) {
      std::vector<RolloutGroup> groups;
      groups.reserve(queries);
      const InputProjection proj(params);
      for (std::size_t q = 0; q < queries; ++q) {
        Rng rng = make_rng(setup.seed, Stream::kRlRollouts, offset + q);
        groups.push_back(generate_bimode_group(proj, tasks[q], cfg.g, setup.gen, rng));
        assign_bimode_advantages(groups.back(), cfg);
      }
      batch = flatten_groups(groups);
      if (const std::size_t bad = bimode_violations(batch, cfg.g); bad != 0)
        throw ContractViolation("bi-mode batch invariant violated " + std::to_string(bad) + " times at step " +
                                std::to_string(step));
    } else {
      batch = grpo_sample(params, tasks, setup.gen, cfg, setup.seed, offset).flat();
    }
    if (setup.observer) setup.observer(step, batch);
    fill_batch_stats(rec, batch, queries);

    for (int epoch = 0; epoch < cfg.inner_epochs; ++epoch) {
      ObjectiveBreakdown br;
      try {
        br = clipped_objective(params, ref, batch, cfg);
        adam_update(params, br.gradient, adam, cfg.adam);
      } catch (const NonFiniteError& e) {
        throw NonFiniteError("rl step " + std::to_string(step) + ": " + e.what());
      }
      rec.objective_total = br.total;
      rec.objective_surrogate = br.surrogate;
      rec.objective_kl = br.kl_term;
      rec.clip_fraction = br.clip_fraction;
    }

    if (sink) sink(rec);
    result.metrics.push_back(std::move(rec));
  }
  return result;
}

}  // namespace bpo
