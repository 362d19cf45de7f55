#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bpo/env/task.hpp"
#include "bpo/policy/policy.hpp"

namespace bpo {

// Thinking / NonThinking force a response regime (training rollouts); Auto
// leaves the choice to the policy (inference).
enum class Mode { Thinking, NonThinking, Auto };

std::string_view to_string(Mode mode);
Mode parse_mode(std::string_view text);

struct ModePrefix {
  TokenSeq tokens;           // appended after <sep>
  TokenMask first_step_mask; // applied to the first generated token only
};

//   Thinking    -> [<think>], first step bans </think>
//   NonThinking -> [<think>, </think>]
//   Auto        -> [<think>]
ModePrefix mode_prefix(Mode mode);

struct GenConfig {
  double temperature = 1.0;
  std::size_t max_gen_len = 24;

  void validate() const;
};

struct Rollout {
  TaskInstance task;
  TokenSeq tokens;  // prompt followed by generated tokens
  std::size_t prompt_len = 0;
  Mode directive = Mode::Auto;
  Mode realized = Mode::Thinking;  // Thinking or NonThinking only
  std::vector<double> old_logprobs;  // one per generated token
  MaskSpec masks;
  // Log-probability, under the sampling policy and the unmasked softmax, of
  // the mode choice that a forced prefix imposed (see choice_position()).
  // Absent for Auto rollouts, whose first generated token is the choice.
  std::optional<double> old_choice_logprob;
  RewardSignal signal;
  double reward = 0.0;
  double advantage = 0.0;
  bool truncated = false;

  std::span<const TokenId> generated() const {
    return std::span<const TokenId>(tokens).subspan(prompt_len);
  }
  std::span<const TokenId> prompt() const { return std::span<const TokenId>(tokens).first(prompt_len); }
  // Tokens strictly between <think> and </think>.
  std::size_t think_body_len() const;
  // Index of the token that follows <think>; this token decides the mode.
  std::size_t choice_position() const;
  // The decided mode as an outcome set at choice_position().
  TokenSet choice_outcome() const;
};

struct RolloutGroup {
  TaskInstance task;
  std::vector<Rollout> thinking;
  std::vector<Rollout> nonthinking;

  std::size_t size() const { return thinking.size() + nonthinking.size(); }
};

TokenSeq build_prompt(const TaskInstance& task, Mode mode);

Rollout generate_rollout(const PolicyParams& params, const TaskInstance& task, Mode mode, const GenConfig& gen,
                         Rng& rng);
// Same result as the params overload; cheaper when one projection serves many rollouts.
Rollout generate_rollout(const InputProjection& proj, const TaskInstance& task, Mode mode, const GenConfig& gen,
                         Rng& rng);

// g forced-thinking rollouts followed by g forced-non-thinking rollouts.
RolloutGroup generate_bimode_group(const PolicyParams& params, const TaskInstance& task, int g,
                                   const GenConfig& gen, Rng& rng);
RolloutGroup generate_bimode_group(const InputProjection& proj, const TaskInstance& task, int g,
                                   const GenConfig& gen, Rng& rng);

// NonThinking iff the token after <think> is </think>, forced or chosen.
Mode classify_mode(const Rollout& rollout);

struct StratumStats {
  std::size_t count = 0;
  double mean_generated = 0.0;
  double mean_think_body = 0.0;
  std::size_t auto_count = 0;
  std::size_t auto_thinking = 0;

  std::optional<double> trigger_rate() const;
};

struct TokenStats {
  StratumStats all;
  StratumStats easy;  // steps <= easy_threshold
  StratumStats hard;  // steps > easy_threshold
};

TokenStats token_stats(std::span<const Rollout> rollouts, int easy_threshold);

// Debug dump: task id, directive, realized mode, token symbols, reward.
std::string rollout_record(const Rollout& rollout, std::size_t task_id);

}  // namespace bpo
