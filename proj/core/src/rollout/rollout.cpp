#include "bpo/rollout/rollout.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "bpo/error.hpp"

namespace bpo {

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::Thinking:
      return "thinking";
    case Mode::NonThinking:
      return "nonthinking";
    case Mode::Auto:
      return "auto";
  }
  return "?";
}

Mode parse_mode(std::string_view text) {
  if (text == "thinking") return Mode::Thinking;
  if (text == "nonthinking") return Mode::NonThinking;
  if (text == "auto") return Mode::Auto;
  throw ContractViolation("unknown mode '" + std::string(text) + "'");
}

ModePrefix mode_prefix(Mode mode) {
  switch (mode) {
    case Mode::Thinking:
      return {{tok::kThinkOpen}, TokenMask{{tok::kThinkClose}}};
    case Mode::NonThinking:
      return {{tok::kThinkOpen, tok::kThinkClose}, {}};
    case Mode::Auto:
      return {{tok::kThinkOpen}, {}};
  }
  throw ContractViolation("bad mode");
}

void GenConfig::validate() const {
  if (!(temperature >= 0.0)) throw ConfigError("generation temperature must be >= 0");
  if (max_gen_len < 2) throw ConfigError("max_gen_len must be >= 2");
}

std::size_t Rollout::think_body_len() const {
  const auto open = std::find(tokens.begin(), tokens.end(), tok::kThinkOpen);
  if (open == tokens.end()) return 0;
  const auto close = std::find(open + 1, tokens.end(), tok::kThinkClose);
  return static_cast<std::size_t>(close - open - 1);
}

std::size_t Rollout::choice_position() const {
  return directive == Mode::NonThinking ? prompt_len - 1 : prompt_len;
}

TokenSet Rollout::choice_outcome() const {
  return realized == Mode::NonThinking ? TokenSet::only({tok::kThinkClose})
                                       : TokenSet::all_but({tok::kThinkClose});
}

TokenSeq build_prompt(const TaskInstance& task, Mode mode) {
  TokenSeq prompt;
  prompt.reserve(task.query.size() + 4);
  prompt.push_back(tok::kBos);
  prompt.insert(prompt.end(), task.query.begin(), task.query.end());
  prompt.push_back(tok::kSep);
  const ModePrefix prefix = mode_prefix(mode);
  prompt.insert(prompt.end(), prefix.tokens.begin(), prefix.tokens.end());
  return prompt;
}

Mode classify_mode(const Rollout& rollout) {
  const std::size_t pos = rollout.choice_position();
  if (pos >= rollout.tokens.size()) throw ContractViolation("rollout has no mode-deciding token");
  return rollout.tokens[pos] == tok::kThinkClose ? Mode::NonThinking : Mode::Thinking;
}

namespace {

// `forward(tokens, position)` returns the step activations at `position`.
template <class Forward>
Rollout generate_with(const Forward& forward, const TaskInstance& task, Mode mode, const GenConfig& gen, Rng& rng) {
  if (gen.max_gen_len < 2) throw ContractViolation("max_gen_len must be >= 2");
  Rollout r;
  r.task = task;
  r.directive = mode;
  r.tokens = build_prompt(task, mode);
  r.prompt_len = r.tokens.size();
  const ModePrefix prefix = mode_prefix(mode);
  if (!prefix.first_step_mask.empty()) r.masks.entries.push_back({r.prompt_len, prefix.first_step_mask});

  bool saw_eos = false;
  for (std::size_t step = 0; step < gen.max_gen_len; ++step) {
    const std::size_t pos = r.tokens.size();
    const TokenMask* mask = r.masks.at(pos);
    const StepActivations act = forward(r.tokens, pos);
    const TokenId next = sample_from_logits(act.logits, gen.temperature, mask, rng);
    r.old_logprobs.push_back(masked_token_logprob(act.logits, next, mask));
    r.tokens.push_back(next);
    if (next == tok::kEos) {
      saw_eos = true;
      break;
    }
  }

  r.truncated = !saw_eos;
  r.realized = classify_mode(r);
  if (mode != Mode::Auto)
    r.old_choice_logprob = event_logprob_from_logits(forward(r.tokens, r.choice_position()).logits, r.choice_outcome());
  r.signal = verify_answer(task, r.generated(),
                           mode == Mode::NonThinking ? PrefixFraming::Closed : PrefixFraming::Open);
  r.reward = r.signal.value;
  return r;
}

}  // namespace

Rollout generate_rollout(const PolicyParams& params, const TaskInstance& task, Mode mode, const GenConfig& gen,
                         Rng& rng) {
  const auto forward = [&](std::span<const TokenId> tokens, std::size_t pos) {
    return forward_step(params, context_at(tokens, pos, params.dims()));
  };
  return generate_with(forward, task, mode, gen, rng);
}

Rollout generate_rollout(const InputProjection& proj, const TaskInstance& task, Mode mode, const GenConfig& gen,
                         Rng& rng) {
  const auto forward = [&](std::span<const TokenId> tokens, std::size_t pos) { return proj.forward_at(tokens, pos); };
  return generate_with(forward, task, mode, gen, rng);
}

RolloutGroup generate_bimode_group(const InputProjection& proj, const TaskInstance& task, int g,
                                   const GenConfig& gen, Rng& rng) {
  if (g < 1) throw ContractViolation("group size g must be >= 1");
  RolloutGroup group;
  group.task = task;
  group.thinking.reserve(static_cast<std::size_t>(g));
  group.nonthinking.reserve(static_cast<std::size_t>(g));
  for (int k = 0; k < g; ++k) group.thinking.push_back(generate_rollout(proj, task, Mode::Thinking, gen, rng));
  for (int k = 0; k < g; ++k) group.nonthinking.push_back(generate_rollout(proj, task, Mode::NonThinking, gen, rng));
  return group;
}

RolloutGroup generate_bimode_group(const PolicyParams& params, const TaskInstance& task, int g,
                                   const GenConfig& gen, Rng& rng) {
  return generate_bimode_group(InputProjection(params), task, g, gen, rng);
}

std::optional<double> StratumStats::trigger_rate() const {
  if (auto_count == 0) return std::nullopt;
  return static_cast<double>(auto_thinking) / static_cast<double>(auto_count);
}

namespace {

void finish(StratumStats& s, double gen_sum, double body_sum) {
  if (s.count == 0) return;
  s.mean_generated = gen_sum / static_cast<double>(s.count);
  s.mean_think_body = body_sum / static_cast<double>(s.count);
}

}  // namespace

TokenStats token_stats(std::span<const Rollout> rollouts, int easy_threshold) {
  if (rollouts.empty()) throw ContractViolation("token_stats needs at least one rollout");
  TokenStats stats;
  double gen[3] = {0, 0, 0};
  double body[3] = {0, 0, 0};
  for (const Rollout& r : rollouts) {
    const bool easy = r.task.steps <= easy_threshold;
    StratumStats* targets[2] = {&stats.all, easy ? &stats.easy : &stats.hard};
    const int idx[2] = {0, easy ? 1 : 2};
    for (int i = 0; i < 2; ++i) {
      StratumStats& s = *targets[i];
      ++s.count;
      gen[idx[i]] += static_cast<double>(r.generated().size());
      body[idx[i]] += static_cast<double>(r.realized == Mode::Thinking ? r.think_body_len() : 0);
      if (r.directive == Mode::Auto) {
        ++s.auto_count;
        if (r.realized == Mode::Thinking) ++s.auto_thinking;
      }
    }
  }
  finish(stats.all, gen[0], body[0]);
  finish(stats.easy, gen[1], body[1]);
  finish(stats.hard, gen[2], body[2]);
  return stats;
}

std::string rollout_record(const Rollout& r, std::size_t task_id) {
  nlohmann::json j;
  j["task_id"] = task_id;
  j["expr"] = r.task.expression();
  j["directive"] = to_string(r.directive);
  j["realized"] = to_string(r.realized);
  j["tokens"] = render_tokens(TokenSeq(r.generated().begin(), r.generated().end()));
  j["reward"] = r.reward;
  return j.dump();
}

}  // namespace bpo
