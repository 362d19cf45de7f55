#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "bpo/env/task.hpp"
#include "bpo/harness/evaluate.hpp"
#include "bpo/harness/metrics.hpp"
#include "bpo/optim/objective.hpp"

namespace bpo {

enum class Algo { Bpo, Grpo };

std::string_view to_string(Algo algo);
Algo parse_algo(std::string_view text);

// Training-task sampler that never yields a held-out expression.
struct TaskSource {
  TaskSpec spec;
  std::unordered_set<std::string> excluded;

  TaskInstance draw(Rng& rng) const;
  std::vector<TaskInstance> draw_batch(Rng& rng, std::size_t n) const;
};

using MetricsSink = std::function<void(const MetricsRecord&)>;
// Sees every sampled batch (flattened, per-query blocks of 2g) before the updates.
using BatchObserver = std::function<void(std::int64_t step, std::span<const Rollout> rollouts)>;

struct RlSetup {
  Algo algo = Algo::Bpo;
  BpoConfig cfg;
  GenConfig gen;
  TaskSource tasks;
  EvalSuite probe;  // may be empty: no probe metrics
  std::uint64_t seed = 0;
  BatchObserver observer;
};

struct RlResult {
  PolicyParams params;
  std::vector<MetricsRecord> metrics;
};

// pi_ref is frozen at `init`; pi_old is the policy at the start of each
// iteration (rollouts carry its log-probs).
RlResult rl_train(const PolicyParams& init, const RlSetup& setup, const MetricsSink& sink = {});

// Structural checks of one BPO batch: g/g split per query, >= 1 think-body
// token for forced thinking, 0 for forced non-thinking. Returns the number of
// violations.
std::size_t bimode_violations(std::span<const Rollout> rollouts, int g);

}  // namespace bpo
