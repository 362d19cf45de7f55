#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "bpo/anneal/curation.hpp"
#include "bpo/anneal/sft.hpp"
#include "bpo/env/task.hpp"
#include "bpo/optim/objective.hpp"
#include "bpo/optim/rl.hpp"
#include "bpo/policy/policy.hpp"
#include "bpo/rollout/rollout.hpp"

namespace bpo {

struct EvalConfig {
  int easy = 40;   // held-out tasks with steps <= task.easy_threshold
  int hard = 120;  // held-out tasks with steps >= hard_min_steps
  int hard_min_steps = 4;
  int probe_easy = 20;  // probe = leading slice of the eval suite
  int probe_hard = 40;

  void validate(const TaskSpec& spec) const;
};

// Experiment profile. It departs from the per-module defaults where end-to-end
// runs need it: the window covers the whole prefix at max_steps 6, and the
// parameter budget stays near 27k.
struct RunConfig {
  std::uint64_t seed = 1;
  TaskSpec task;
  PolicyDims policy{.window = 22, .embed = 8, .hidden = 135};
  CurationConfig curation;
  int pool_size = 20000;
  int miner_warmup_epochs = 0;  // 0 mines with the untrained policy
  SftConfig sft;
  BpoConfig rl{.adam = {.lr = 1e-3}};
  GenConfig generation;
  Algo algo = Algo::Bpo;
  EvalConfig eval;
  std::string output_dir;

  void validate() const;
};

// Nested JSON document; unknown keys anywhere are a ConfigError. Missing keys
// keep their defaults.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::string& path);
nlohmann::json to_json(const RunConfig& cfg);

}  // namespace bpo
