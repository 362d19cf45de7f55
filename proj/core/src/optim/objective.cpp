#include "bpo/optim/objective.hpp"

#include <cmath>
#include <numeric>
#include <optional>

#include "bpo/error.hpp"

namespace bpo {

std::string_view to_string(AdvantageScope scope) {
  return scope == AdvantageScope::Combined ? "combined" : "per_mode";
}

AdvantageScope parse_advantage_scope(std::string_view text) {
  if (text == "combined") return AdvantageScope::Combined;
  if (text == "per_mode") return AdvantageScope::PerMode;
  throw ConfigError("unknown advantage scope '" + std::string(text) + "'");
}

void BpoConfig::validate() const {
  if (g < 1) throw ConfigError("rl.g must be >= 1");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("rl.epsilon must lie in (0, 1)");
  if (!(beta >= 0.0)) throw ConfigError("rl.beta must be >= 0");
  if (!(eps_std > 0.0)) throw ConfigError("rl.eps_std must be > 0");
  if (inner_epochs < 1) throw ConfigError("rl.inner_epochs must be >= 1");
  if (batch_queries < 1) throw ConfigError("rl.batch_queries must be >= 1");
  if (iters < 0) throw ConfigError("rl.iters must be >= 0");
  if (probe_every < 1) throw ConfigError("rl.probe_every must be >= 1");
  adam.validate();
}

namespace {

void normalize_block(std::span<const double> r, std::span<double> out, double eps_std) {
  const double n = static_cast<double>(r.size());
  const double mean = std::accumulate(r.begin(), r.end(), 0.0) / n;
  double var = 0.0;
  for (double x : r) var += (x - mean) * (x - mean);
  const double std_dev = std::sqrt(var / n);
  for (std::size_t i = 0; i < r.size(); ++i) out[i] = (r[i] - mean) / (std_dev + eps_std);
}

}  // namespace

std::vector<double> group_advantages(std::span<const double> rewards, AdvantageScope scope, double eps_std) {
  if (rewards.empty()) return {};
  std::vector<double> adv(rewards.size());
  if (scope == AdvantageScope::Combined) {
    normalize_block(rewards, adv, eps_std);
  } else {
    if (rewards.size() % 2 != 0) throw ContractViolation("per-mode advantages need an even (2g) reward list");
    const std::size_t g = rewards.size() / 2;
    normalize_block(rewards.first(g), std::span<double>(adv).first(g), eps_std);
    normalize_block(rewards.subspan(g), std::span<double>(adv).subspan(g), eps_std);
  }
  return adv;
}

double kl_token(double logp_theta, double logp_ref) {
  const double l = logp_ref - logp_theta;
  return std::expm1(l) - l;
}

ObjectiveBreakdown clipped_objective(const PolicyParams& params, const ReferenceSnapshot& ref,
                                     std::span<const Rollout> rollouts, const BpoConfig& cfg, bool with_gradient) {
  ObjectiveBreakdown out;
  if (with_gradient) out.gradient = GradientVector(params.size());
  if (rollouts.empty()) return out;
  if (!(ref.params.dims() == params.dims())) throw ContractViolation("reference dims differ from policy dims");

  const PolicyDims& dims = params.dims();
  const double inv_n = 1.0 / static_cast<double>(rollouts.size());
  const double lo = 1.0 - cfg.epsilon;
  const double hi = 1.0 + cfg.epsilon;
  std::size_t clipped = 0;
  std::vector<double> dz(static_cast<std::size_t>(dims.vocab));

  // One scored unit: a generated token, or the imposed mode choice.
  struct Unit {
    StepActivations act;
    double logp = 0.0;
    double old_logp = 0.0;
    double ref_logp = 0.0;
    TokenId token = 0;
    const TokenMask* mask = nullptr;
    const TokenSet* event = nullptr;
  };
  std::vector<Unit> units;
  const InputProjection proj(params);
  const InputProjection ref_proj(ref.params);
  std::optional<GradAccumulator> acc;
  if (with_gradient) acc.emplace(params, out.gradient);

  for (const Rollout& r : rollouts) {
    const std::size_t gen_len = r.tokens.size() - r.prompt_len;
    if (r.old_logprobs.size() != gen_len)
      throw ContractViolation("rollout old_logprobs length does not match its generated length");
    if (!std::isfinite(r.advantage)) throw NonFiniteError("non-finite advantage");

    units.clear();
    for (std::size_t t = r.prompt_len; t < r.tokens.size(); ++t) {
      Unit u;
      u.act = proj.forward_at(r.tokens, t);
      u.token = r.tokens[t];
      u.mask = r.masks.at(t);
      u.logp = masked_token_logprob(u.act.logits, u.token, u.mask);
      u.old_logp = r.old_logprobs[t - r.prompt_len];
      u.ref_logp = masked_token_logprob(ref_proj.forward_at(r.tokens, t).logits, u.token, u.mask);
      units.push_back(std::move(u));
    }
    TokenSet choice;
    if (cfg.credit_mode_choice && r.directive != Mode::Auto) {
      if (!r.old_choice_logprob) throw ContractViolation("forced rollout is missing its old choice log-prob");
      choice = r.choice_outcome();
      const std::size_t pos = r.choice_position();
      Unit u;
      u.act = proj.forward_at(r.tokens, pos);
      u.event = &choice;
      u.logp = event_logprob_from_logits(u.act.logits, choice);
      u.old_logp = *r.old_choice_logprob;
      u.ref_logp = event_logprob_from_logits(ref_proj.forward_at(r.tokens, pos).logits, choice);
      units.push_back(std::move(u));
    }
    if (units.empty()) throw ContractViolation("rollout has no scored units");

    const double A = r.advantage;
    const double inv_t = 1.0 / static_cast<double>(units.size());
    double term_sum = 0.0;
    double kl_sum = 0.0;
    double ratio_sum = 0.0;
    for (Unit& u : units) {
      const double ratio = std::exp(u.logp - u.old_logp);
      double term = ratio * A;
      double dterm = ratio * A;
      if ((A > 0.0 && ratio > hi) || (A < 0.0 && ratio < lo)) {
        term = (A > 0.0 ? hi : lo) * A;
        dterm = 0.0;
        ++clipped;
      }
      const double l = u.ref_logp - u.logp;
      const double kl = std::expm1(l) - l;
      const double dkl = -std::expm1(l);  // d kl / d logp
      term_sum += term;
      kl_sum += kl;
      ratio_sum += ratio;
      if (with_gradient) {
        const double w = (dterm - cfg.beta * dkl) * inv_t * inv_n;
        if (w != 0.0) {
          std::fill(dz.begin(), dz.end(), 0.0);
          if (u.event)
            add_event_dlogits(u.act.logits, *u.event, w, dz);
          else
            add_masked_token_dlogits(u.act.logits, u.token, u.mask, w, dz);
          acc->backward(u.act, dz);
        }
      }
    }
    out.surrogate += term_sum * inv_t * inv_n;
    out.kl_term += kl_sum * inv_t * inv_n;
    out.ratio_means.push_back(ratio_sum * inv_t);
    out.scored_units += units.size();
  }
  if (acc) acc->flush();
  out.total = out.surrogate - cfg.beta * out.kl_term;
  out.clip_fraction = static_cast<double>(clipped) / static_cast<double>(out.scored_units);
  if (!std::isfinite(out.total)) throw NonFiniteError("objective is not finite");
  return out;
}

std::vector<Rollout> flatten_groups(std::span<const RolloutGroup> groups) {
  std::vector<Rollout> flat;
  for (const auto& g : groups) {
    flat.insert(flat.end(), g.thinking.begin(), g.thinking.end());
    flat.insert(flat.end(), g.nonthinking.begin(), g.nonthinking.end());
  }
  return flat;
}

ObjectiveBreakdown bpo_objective(const PolicyParams& params, const ReferenceSnapshot& ref,
                                 std::span<const RolloutGroup> groups, const BpoConfig& cfg, bool with_gradient) {
  for (const auto& g : groups)
    if (g.thinking.size() != g.nonthinking.size())
      throw ContractViolation("bi-mode group has unequal thinking/non-thinking sizes");
  const std::vector<Rollout> flat = flatten_groups(groups);
  return clipped_objective(params, ref, flat, cfg, with_gradient);
}

void assign_bimode_advantages(RolloutGroup& group, const BpoConfig& cfg) {
  std::vector<double> rewards;
  for (const auto& r : group.thinking) rewards.push_back(r.reward);
  for (const auto& r : group.nonthinking) rewards.push_back(r.reward);
  const std::vector<double> adv = group_advantages(rewards, cfg.advantage_scope, cfg.eps_std);
  const std::size_t g = group.thinking.size();
  for (std::size_t k = 0; k < g; ++k) group.thinking[k].advantage = adv[k];
  for (std::size_t k = 0; k < group.nonthinking.size(); ++k) group.nonthinking[k].advantage = adv[g + k];
}

std::vector<Rollout> GrpoBatch::flat() const {
  std::vector<Rollout> out;
  for (const auto& g : groups) out.insert(out.end(), g.begin(), g.end());
  return out;
}

GrpoBatch grpo_sample(const PolicyParams& params, std::span<const TaskInstance> tasks, const GenConfig& gen,
                      const BpoConfig& cfg, std::uint64_t seed, std::uint64_t stream_offset) {
  GrpoBatch batch;
  const InputProjection proj(params);
  const int group_size = 2 * cfg.g;
  for (std::size_t q = 0; q < tasks.size(); ++q) {
    Rng rng = make_rng(seed, Stream::kRlRollouts, stream_offset + q);
    std::vector<Rollout> group;
    std::vector<double> rewards;
    for (int k = 0; k < group_size; ++k) {
      group.push_back(generate_rollout(proj, tasks[q], Mode::Auto, gen, rng));
      rewards.push_back(group.back().reward);
    }
    const std::vector<double> adv = group_advantages(rewards, AdvantageScope::Combined, cfg.eps_std);
    for (int k = 0; k < group_size; ++k) group[static_cast<std::size_t>(k)].advantage = adv[static_cast<std::size_t>(k)];
    batch.groups.push_back(std::move(group));
  }
  return batch;
}

GrpoStep grpo_sample_and_objective(const PolicyParams& params, const ReferenceSnapshot& ref,
                                   std::span<const TaskInstance> tasks, const GenConfig& gen, const BpoConfig& cfg,
                                   std::uint64_t seed, std::uint64_t stream_offset) {
  GrpoStep step;
  step.batch = grpo_sample(params, tasks, gen, cfg, seed, stream_offset);
  const std::vector<Rollout> flat = step.batch.flat();
  step.objective = clipped_objective(params, ref, flat, cfg);
  return step;
}

}  // namespace bpo
