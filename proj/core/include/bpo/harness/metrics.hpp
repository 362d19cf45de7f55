#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bpo/harness/evaluate.hpp"

namespace bpo {

// Held-out probe in all three modes, taken on the policy that generated the
// step's rollouts.
struct ProbeMetrics {
  double trigger_rate = 0.0;
  double trigger_rate_easy = 0.0;
  double trigger_rate_hard = 0.0;
  double acc_think = 0.0;
  double acc_nothink = 0.0;
  double acc_auto = 0.0;
  double acc_think_easy = 0.0, acc_think_hard = 0.0;
  double acc_nothink_easy = 0.0, acc_nothink_hard = 0.0;
  double acc_auto_easy = 0.0, acc_auto_hard = 0.0;
  double tokens_think_easy = 0.0, tokens_think_hard = 0.0;
  double tokens_nothink_easy = 0.0, tokens_nothink_hard = 0.0;
  double tokens_auto_easy = 0.0, tokens_auto_hard = 0.0;

  static ProbeMetrics from(const EvalResult& think, const EvalResult& nothink, const EvalResult& autom);
};

struct MetricsRecord {
  std::int64_t step = 0;
  std::string algo;
  double objective_total = 0.0;
  double objective_surrogate = 0.0;
  double objective_kl = 0.0;
  double clip_fraction = 0.0;
  std::optional<double> reward_think;    // mean reward of realized-thinking rollouts
  std::optional<double> reward_nothink;
  double think_items = 0.0;              // per query, realized-thinking rollouts
  double nothink_items = 0.0;
  double think_correct_items = 0.0;      // per query, correct realized-thinking rollouts
  double nothink_correct_items = 0.0;
  double minority_share = 0.0;           // min(think, nothink) / all sampled rollouts
  double mean_tokens = 0.0;              // generated tokens per sampled rollout
  std::optional<ProbeMetrics> probe;
};

nlohmann::json to_json(const MetricsRecord& record);
MetricsRecord metrics_from_json(const nlohmann::json& j);

nlohmann::json to_json(const EvalResult& result);

std::vector<MetricsRecord> load_metrics(const std::string& path);

}  // namespace bpo
