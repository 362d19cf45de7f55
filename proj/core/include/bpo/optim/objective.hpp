#pragma once

#include <span>
#include <string>
#include <vector>

#include "bpo/optim/adam.hpp"
#include "bpo/policy/policy.hpp"
#include "bpo/rollout/rollout.hpp"

namespace bpo {

enum class AdvantageScope { Combined, PerMode };

std::string_view to_string(AdvantageScope scope);
AdvantageScope parse_advantage_scope(std::string_view text);

struct BpoConfig {
  int g = 4;
  double epsilon = 0.2;
  double beta = 0.01;
  double eps_std = 1e-6;
  AdamHyper adam{};
  int inner_epochs = 2;
  int batch_queries = 32;
  int iters = 150;
  AdvantageScope advantage_scope = AdvantageScope::Combined;
  // Score the mode choice that a forced prefix imposed as one extra unit of
  // the rollout (see Rollout::old_choice_logprob).
  bool credit_mode_choice = true;
  int probe_every = 5;

  void validate() const;
};

// rewards = thinking block followed by non-thinking block (2g entries).
// (r - mean) / (std + eps_std) with the population standard deviation, over
// all 2g (Combined) or within each g-block (PerMode).
std::vector<double> group_advantages(std::span<const double> rewards, AdvantageScope scope, double eps_std);

// exp(l) - l - 1 with l = logp_ref - logp_theta; non-negative, zero iff equal.
double kl_token(double logp_theta, double logp_ref);

struct ReferenceSnapshot {
  PolicyParams params;
  std::string tag;
};

struct ObjectiveBreakdown {
  double total = 0.0;      // surrogate - beta * kl_term (maximized)
  double surrogate = 0.0;  // mean over rollouts of token-mean clipped terms
  double kl_term = 0.0;    // mean over rollouts of token-mean kl_token
  std::vector<double> ratio_means;  // per rollout
  double clip_fraction = 0.0;       // fraction of scored units on a clipped branch
  std::size_t scored_units = 0;
  GradientVector gradient;
};

// Clipped surrogate with KL penalty over any rollout batch (rollouts must
// carry old log-probs and advantages). Every rollout weighs 1/N.
ObjectiveBreakdown clipped_objective(const PolicyParams& params, const ReferenceSnapshot& ref,
                                     std::span<const Rollout> rollouts, const BpoConfig& cfg,
                                     bool with_gradient = true);

// Flattens groups in (thinking block, non-thinking block) order per query.
std::vector<Rollout> flatten_groups(std::span<const RolloutGroup> groups);

ObjectiveBreakdown bpo_objective(const PolicyParams& params, const ReferenceSnapshot& ref,
                                 std::span<const RolloutGroup> groups, const BpoConfig& cfg,
                                 bool with_gradient = true);

// Writes group_advantages into each rollout of the group.
void assign_bimode_advantages(RolloutGroup& group, const BpoConfig& cfg);

// Vanilla GRPO arm: 2g Auto rollouts per query, advantages over the 2g as sampled.
struct GrpoBatch {
  std::vector<std::vector<Rollout>> groups;  // one entry per query

  std::vector<Rollout> flat() const;
};

struct GrpoStep {
  GrpoBatch batch;
  ObjectiveBreakdown objective;
};

GrpoBatch grpo_sample(const PolicyParams& params, std::span<const TaskInstance> tasks, const GenConfig& gen,
                      const BpoConfig& cfg, std::uint64_t seed, std::uint64_t stream_offset);
GrpoStep grpo_sample_and_objective(const PolicyParams& params, const ReferenceSnapshot& ref,
                                   std::span<const TaskInstance> tasks, const GenConfig& gen,
                                   const BpoConfig& cfg, std::uint64_t seed, std::uint64_t stream_offset = 0);

}  // namespace bpo
