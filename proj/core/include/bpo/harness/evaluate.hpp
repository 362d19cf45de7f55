#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "bpo/env/task.hpp"
#include "bpo/policy/policy.hpp"
#include "bpo/rollout/rollout.hpp"

namespace bpo {

// Held-out tasks split into an easy and a hard stratum.
struct EvalSuite {
  std::vector<TaskInstance> easy;
  std::vector<TaskInstance> hard;

  std::size_t size() const { return easy.size() + hard.size(); }
  EvalSuite prefix(std::size_t n_easy, std::size_t n_hard) const;
};

struct StratumEval {
  std::size_t count = 0;
  double accuracy = 0.0;
  double mean_tokens = 0.0;
  double mean_think_body = 0.0;
  std::optional<double> trigger_rate;  // Auto only
};

struct EvalResult {
  Mode mode = Mode::Auto;
  StratumEval all;
  StratumEval easy;
  StratumEval hard;
};

// Greedy (temperature 0) generation of every suite task under `mode`.
EvalResult evaluate(const PolicyParams& params, const EvalSuite& suite, Mode mode, std::size_t max_gen_len);

}  // namespace bpo
