// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any selected criterion fails.
//
//   bpo_acceptance --prepare --runs DIR     build or reuse the seed runs
//   bpo_acceptance --criterion N --runs DIR one criterion
//   bpo_acceptance --runs DIR               all criteria

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#if __has_include(<CLI11.hpp>)
#include <CLI11.hpp>
#else
#include <CLI/CLI.hpp>
#endif
#include "bpo/anneal/curation.hpp"
#include "bpo/anneal/sft.hpp"
#include "bpo/error.hpp"
#include "bpo/harness/experiment.hpp"
#include "bpo/optim/objective.hpp"
#include "bpo/optim/rl.hpp"
#include "bpo/policy/checkpoint.hpp"
#include "pipeline.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace bpo;
using bpo::testing::fd_max_rel_error;
using bpo::testing::oracle_eval;
using bpo::testing::oracle_item_grammar;
using bpo::testing::rel_diff;
using bpo::testing::small_dims;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[fail] ";
    }
    detail << what << "; ";
  }
};

std::string fmt(double x, int prec = 4) {
  std::ostringstream s;
  s.precision(prec);
  s << x;
  return s.str();
}

std::vector<RolloutGroup> random_groups(const PolicyParams& p, int queries, int g, std::uint64_t seed) {
  Rng rng = make_rng(seed, Stream::kTest);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<RolloutGroup> groups;
  for (int q = 0; q < queries; ++q) {
    groups.push_back(generate_bimode_group(p, sample_task(rng, TaskSpec{}), g, GenConfig{1.0, 14}, rng));
    for (auto* block : {&groups.back().thinking, &groups.back().nonthinking})
      for (Rollout& r : *block) r.reward = u(rng) < 0.5 ? 1.0 : 0.0;
    assign_bimode_advantages(groups.back(), BpoConfig{});
  }
  return groups;
}

// ---------------------------------------------------------------------------

Verdict criterion_gradients() {
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  constexpr double kStep = 1e-5;
  constexpr std::size_t kCoords = 250;
  const PolicyDims dims = small_dims();

  {  // weighted log-prob
    const PolicyParams p = init_params(101, dims);
    Rng rng = make_rng(101, Stream::kTest);
    const Rollout r = generate_rollout(p, sample_task(rng, TaskSpec{}), Mode::Thinking, GenConfig{1.0, 14}, rng);
    std::vector<double> w(r.generated().size());
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (double& x : w) x = u(rng);
    const GradientVector g = weighted_logprob_grad(p, r.tokens, r.prompt_len, r.masks, w);
    const auto value = [&](const PolicyParams& q) {
      const std::vector<double> lp = logprob_sequence(q, r.tokens, r.prompt_len, r.masks);
      return std::inner_product(lp.begin(), lp.end(), w.begin(), 0.0);
    };
    const double err = fd_max_rel_error(p, value, g.values(), kStep, kCoords, 1);
    v.require(err <= 1e-4, "weighted log-prob " + fmt(err));
  }
  {  // SFT cross-entropy
    const PolicyParams p = init_params(102, dims);
    Rng rng = make_rng(102, Stream::kTest);
    std::vector<CurationItem> items;
    for (int i = 0; i < 6; ++i)
      items.push_back(build_item(sample_task(rng, TaskSpec{}), i % 2 ? ModeLabel::Direct : ModeLabel::Reasoning,
                                 Heuristic::Difficulty));
    GradientVector g(p.size());
    sft_loss(p, items, &g);
    const double err = fd_max_rel_error(p, [&](const PolicyParams& q) { return sft_loss(q, items); }, g.values(),
                                        kStep, kCoords, 2);
    v.require(err <= 1e-4, "sft cross-entropy " + fmt(err));
  }
  {  // KL aggregate: zero advantages and beta 1 leave -kl_term as the objective
    const PolicyParams p = init_params(103, dims);
    const PolicyParams ref = init_params(104, dims);
    std::vector<RolloutGroup> groups = random_groups(p, 2, 2, 103);
    for (auto& gr : groups)
      for (auto* block : {&gr.thinking, &gr.nonthinking})
        for (Rollout& r : *block) r.advantage = 0.0;
    BpoConfig cfg;
    cfg.beta = 1.0;
    const ReferenceSnapshot snap{ref, "ref"};
    const ObjectiveBreakdown br = bpo_objective(p, snap, groups, cfg);
    const double err = fd_max_rel_error(
        p, [&](const PolicyParams& q) { return bpo_objective(q, snap, groups, cfg, false).total; },
        br.gradient.values(), kStep, kCoords, 3);
    v.require(err <= 1e-4 && br.surrogate == 0.0, "kl aggregate " + fmt(err));
  }
  {  // full surrogate, one group, g = 2, away from ratio one
    PolicyParams p = init_params(105, dims);
    const std::vector<RolloutGroup> groups = random_groups(p, 1, 2, 105);
    const PolicyParams old = p;
    for (double& x : p.flat()) x *= 1.04;
    BpoConfig cfg;
    cfg.beta = 0.05;
    const ReferenceSnapshot snap{old, "old"};
    const ObjectiveBreakdown br = bpo_objective(p, snap, groups, cfg);
    const double err = fd_max_rel_error(
        p, [&](const PolicyParams& q) { return bpo_objective(q, snap, groups, cfg, false).total; },
        br.gradient.values(), kStep, kCoords, 4);
    v.require(err <= 1e-4, "bpo surrogate g=2 " + fmt(err));
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  v.require(secs < 60.0, "runtime " + fmt(secs, 3) + " s with " + std::to_string(kCoords) + " coords each");
  return v;
}

Verdict criterion_advantages() {
  Verdict v;
  const double eps = BpoConfig{}.eps_std;
  std::mt19937_64 rng(202);
  std::bernoulli_distribution coin(0.5);
  double worst_mean = 0.0, worst_std_lo = 1.0, worst_std_hi = 0.0;
  int with_var = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> r(8);
    for (double& x : r) x = coin(rng) ? 1.0 : 0.0;
    const std::vector<double> a = group_advantages(r, AdvantageScope::Combined, eps);
    const double mean = std::accumulate(a.begin(), a.end(), 0.0) / 8.0;
    worst_mean = std::max(worst_mean, std::abs(mean));
    const bool constant = std::all_of(r.begin(), r.end(), [&](double x) { return x == r[0]; });
    if (constant) {
      if (std::any_of(a.begin(), a.end(), [](double x) { return x != 0.0; })) v.require(false, "constant rewards");
      continue;
    }
    ++with_var;
    double var = 0.0;
    for (double x : a) var += (x - mean) * (x - mean);
    const double sd = std::sqrt(var / 8.0);
    worst_std_lo = std::min(worst_std_lo, sd);
    worst_std_hi = std::max(worst_std_hi, sd);
  }
  v.require(worst_mean <= 1e-9, "max |mean| " + fmt(worst_mean, 3));
  v.require(worst_std_lo >= 1.0 - 10.0 * eps && worst_std_hi <= 1.0,
            "std in [" + fmt(worst_std_lo, 10) + ", " + fmt(worst_std_hi, 10) + "] over " + std::to_string(with_var));
  const std::vector<double> zeros = group_advantages(std::vector<double>(8, 1.0), AdvantageScope::Combined, eps);
  v.require(std::all_of(zeros.begin(), zeros.end(), [](double x) { return x == 0.0; }), "all-equal -> zeros");

  // [1,1,0,0]: std 0.5, so the stabilizer shifts each entry by 2*eps_std.
  const std::vector<double> hand{1, 1, 0, 0};
  const std::vector<double> expect{1, 1, -1, -1};
  const std::vector<double> tight = group_advantages(hand, AdvantageScope::Combined, 1e-7);
  const std::vector<double> dflt = group_advantages(hand, AdvantageScope::Combined, eps);
  double err_tight = 0.0, err_formula = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    err_tight = std::max(err_tight, std::abs(tight[i] - expect[i]));
    err_formula = std::max(err_formula, std::abs(dflt[i] - expect[i] * 0.5 / (0.5 + eps)));
  }
  v.require(err_tight <= 1e-6, "hand example at eps_std 1e-7 off by " + fmt(err_tight, 3));
  v.require(err_formula <= 1e-15, "hand example at default eps_std equals 0.5/(0.5+eps_std)");
  return v;
}

Verdict criterion_ratio_one() {
  Verdict v;
  double worst = 0.0;
  BpoConfig cfg;
  cfg.beta = 0.0;
  for (int batch = 0; batch < 20; ++batch) {
    const PolicyParams p = init_params(300 + static_cast<std::uint64_t>(batch), small_dims());
    const std::vector<RolloutGroup> groups = random_groups(p, 2, 2, 300 + static_cast<std::uint64_t>(batch));
    const ObjectiveBreakdown br = bpo_objective(p, ReferenceSnapshot{p, "self"}, groups, cfg);
    // Oracle: advantage-weighted score function through the reference
    // single-step forward/backward, one rollout at a time.
    const std::vector<Rollout> flat = flatten_groups(groups);
    GradientVector oracle(p.size());
    for (const Rollout& r : flat) {
      const double units = static_cast<double>(r.generated().size() + 1);
      const double w = r.advantage / (units * static_cast<double>(flat.size()));
      for (std::size_t t = r.prompt_len; t < r.tokens.size(); ++t) {
        const StepActivations act = forward_step(p, context_at(r.tokens, t, p.dims()));
        std::vector<double> dz(act.logits.size(), 0.0);
        add_masked_token_dlogits(act.logits, r.tokens[t], r.masks.at(t), w, dz);
        backward_step(p, act, dz, oracle);
      }
      const StepActivations act = forward_step(p, context_at(r.tokens, r.choice_position(), p.dims()));
      std::vector<double> dz(act.logits.size(), 0.0);
      add_event_dlogits(act.logits, r.choice_outcome(), w, dz);
      backward_step(p, act, dz, oracle);
    }
    worst = std::max(worst, rel_diff(br.gradient.values(), oracle.values()));
  }
  v.require(worst <= 1e-10, "max relative difference over 20 micro-batches " + fmt(worst, 3));
  return v;
}

Verdict criterion_clipping() {
  Verdict v;
  const PolicyParams p = init_params(401, small_dims());
  Rng rng = make_rng(401, Stream::kTest);
  Rollout base = generate_rollout(p, make_task("6*7"), Mode::Auto, GenConfig{1.0, 3}, rng);
  base.tokens.resize(base.prompt_len + 1);
  base.old_logprobs.resize(1);
  const double logp = base.old_logprobs[0];
  BpoConfig cfg;
  cfg.beta = 0.0;
  struct Probe {
    double ratio, adv;
    bool clipped_outward;
  };
  for (const Probe& pr : {Probe{1.3, 1.0, true}, Probe{1.1, 1.0, false}, Probe{0.7, 1.0, false},
                          Probe{0.7, -1.0, true}, Probe{0.9, -1.0, false}, Probe{1.3, -1.0, false}}) {
    Rollout r = base;
    r.old_logprobs[0] = logp - std::log(pr.ratio);
    r.advantage = pr.adv;
    const std::vector<Rollout> batch{r};
    const ObjectiveBreakdown br = clipped_objective(p, ReferenceSnapshot{p, "self"}, batch, cfg);
    const bool zero = br.gradient.max_abs() == 0.0;
    v.require(zero == pr.clipped_outward, "(r=" + fmt(pr.ratio) + ", A=" + fmt(pr.adv) + ") grad " +
                                              (zero ? "zero" : "nonzero"));
  }
  return v;
}

Verdict criterion_kl() {
  Verdict v;
  std::mt19937_64 rng(505);
  std::uniform_real_distribution<double> u(-12.0, 0.0);
  std::size_t negative = 0, zero_off_diag = 0, nonzero_diag = 0;
  for (int i = 0; i < 10000; ++i) {
    const double a = u(rng);
    const double b = i % 10 == 0 ? a : u(rng);
    const double k = kl_token(a, b);
    if (k < 0.0) ++negative;
    if (a == b && k != 0.0) ++nonzero_diag;
    if (a != b && k == 0.0) ++zero_off_diag;
  }
  v.require(negative == 0, std::to_string(negative) + " negative values");
  v.require(nonzero_diag == 0 && zero_off_diag == 0, "zero exactly on equal inputs");
  const double hand = kl_token(0.0, std::log(2.0));
  v.require(std::abs(hand - 0.30685) <= 1e-5, "value at l=ln2 " + fmt(hand, 8));
  return v;
}

Verdict criterion_bimode(const fs::path& runs) {
  Verdict v;
  const RunConfig cfg = acceptance::arm_config(runs, Algo::Bpo, acceptance::kSeeds[0]);
  const RunPaths paths(cfg.output_dir);
  const PolicyParams init = load_checkpoint(paths.sft_ckpt().string());
  const EvalSuite eval = make_eval_suite(cfg);
  RlSetup setup;
  setup.algo = Algo::Bpo;
  setup.cfg = cfg.rl;
  setup.gen = cfg.generation;
  setup.tasks = make_training_source(cfg, eval);
  setup.seed = cfg.seed;
  const auto g = static_cast<std::size_t>(cfg.rl.g);
  std::size_t batches = 0, rollouts = 0, violations = 0;
  // Counts straight from the tokens: the forced prefix is <think> or
  // <think></think> right after <sep>, and the body is everything between
  // <think> and the first </think>.
  setup.observer = [&](std::int64_t, std::span<const Rollout> batch) {
    ++batches;
    rollouts += batch.size();
    if (batch.size() != g * 2 * static_cast<std::size_t>(cfg.rl.batch_queries)) ++violations;
    for (std::size_t start = 0; start + 2 * g <= batch.size(); start += 2 * g) {
      std::size_t thinking = 0, nonthinking = 0;
      for (std::size_t k = start; k < start + 2 * g; ++k) {
        const TokenSeq& t = batch[k].tokens;
        const auto sep = std::find(t.begin(), t.end(), 18);
        if (sep == t.end() || sep + 1 == t.end() || *(sep + 1) != 19) {
          ++violations;
          continue;
        }
        const auto close = std::find(sep + 2, t.end(), 20);
        const auto body = close - (sep + 2);
        const bool forced_closed = batch[k].prompt_len == static_cast<std::size_t>(sep - t.begin()) + 3;
        if (forced_closed) {
          ++nonthinking;
          if (body != 0) ++violations;
        } else {
          ++thinking;
          if (body < 1) ++violations;
        }
        if (batch[k].tokens.size() < batch[k].prompt_len) ++violations;
        if (!std::equal(t.begin(), sep, batch[start].tokens.begin())) ++violations;
      }
      if (thinking != g || nonthinking != g) ++violations;
    }
  };
  const auto t0 = std::chrono::steady_clock::now();
  rl_train(init, setup);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  v.require(batches == static_cast<std::size_t>(cfg.rl.iters), std::to_string(batches) + " batches");
  v.require(violations == 0, std::to_string(violations) + " violations over " + std::to_string(rollouts) +
                                 " rollouts (" + fmt(secs, 3) + " s)");
  return v;
}

Verdict criterion_curation() {
  Verdict v;
  TaskSpec spec;
  CurationConfig cfg;
  Rng pool_rng = make_rng(707, Stream::kPool);
  std::vector<TaskInstance> pool;
  while (pool.size() < 500) {
    TaskInstance t = sample_task(pool_rng, spec);
    if (t.kind == TaskKind::Objective) pool.push_back(std::move(t));
  }
  // Calibrated miner: a short direct-answer warm-up puts per-task success
  // counts across the whole 0..N range.
  std::vector<CurationItem> warm;
  for (const auto& t : pool) warm.push_back(build_item(t, ModeLabel::Direct, Heuristic::Performance));
  SftConfig warm_cfg;
  warm_cfg.epochs = 3;
  const PolicyParams miner = sft_train(init_params(707, RunConfig{}.policy), warm, warm_cfg).params;

  const CurationOutcome out = curate(pool, miner, cfg, 707);
  std::size_t zero = 0, zero_reasoning = 0, some = 0, some_direct = 0, recount_mismatch = 0;
  std::map<int, int> histogram;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    // Independent recount of the miner's attempts from the same substream.
    Rng rng = make_rng(707, Stream::kMining, i);
    int correct = 0;
    for (int k = 0; k < cfg.samples; ++k) {
      const Rollout r = generate_rollout(miner, pool[i], Mode::Auto, GenConfig{cfg.mining_temperature, cfg.max_gen_len}, rng);
      const auto gen = r.generated();
      const auto close = std::find(gen.begin(), gen.end(), 20);
      correct += close != gen.end() && gen.end() - close == 3 && *(close + 1) == oracle_eval(pool[i].expression()) &&
                 *(close + 2) == 17;
    }
    if (correct != out.mining[i].correct) ++recount_mismatch;
    ++histogram[correct];
    if (correct == 0) {
      ++zero;
      zero_reasoning += out.mining[i].label == ModeLabel::Reasoning;
    } else {
      ++some;
      some_direct += out.mining[i].label == ModeLabel::Direct;
    }
  }
  std::ostringstream hist;
  for (const auto& [k, n] : histogram) hist << k << ":" << n << " ";
  v.require(recount_mismatch == 0, "recount mismatches " + std::to_string(recount_mismatch));
  v.require(zero > 0 && some > 0, "success histogram " + hist.str());
  v.require(zero_reasoning == zero, std::to_string(zero_reasoning) + "/" + std::to_string(zero) + " 0/N tasks Reasoning");
  v.require(some_direct == some, std::to_string(some_direct) + "/" + std::to_string(some) + " >=1/N tasks Direct");

  // Filters: clean items plus injected inconsistent and duplicate copies.
  std::vector<CurationItem> clean = out.items;
  std::vector<CurationItem> mixed = clean;
  std::size_t injected = 0;
  for (std::size_t i = 0; i < clean.size(); i += 7) {
    CurationItem bad = clean[i];
    bad.response[bad.response.size() - 2] = (bad.task.answer + 1) % 10;
    mixed.push_back(bad);
    mixed.push_back(clean[i]);  // duplicate
    injected += 2;
  }
  const FilterResult filtered = filter_items(mixed, true);
  const std::size_t rejected = mixed.size() - filtered.kept.size();
  v.require(rejected == injected && filtered.report.rejected() == injected,
            std::to_string(rejected) + "/" + std::to_string(injected) + " injected rejected");
  v.require(filter_items(clean, true).kept.size() == clean.size(), "clean items all kept");
  std::size_t grammar_bad = 0;
  for (const CurationItem& item : filtered.kept)
    grammar_bad += !oracle_item_grammar(item.response, item.label == ModeLabel::Reasoning);
  v.require(grammar_bad == 0, std::to_string(grammar_bad) + " kept items off-grammar");
  return v;
}

const nlohmann::json& stratum(const nlohmann::json& eval, const char* mode, const char* s) {
  return eval.at("post_rl").at(mode).at(s);
}

Verdict criterion_dynamics(const fs::path& runs) {
  Verdict v;
  const RunConfig ref;
  v.require(ref.policy.param_count() >= 25000 && ref.policy.param_count() <= 29000 && ref.rl.g == 4 &&
                ref.rl.batch_queries == 32 && ref.rl.iters >= 150,
            "profile " + std::to_string(ref.policy.param_count()) + " params, g=4, 32 queries, " +
                std::to_string(ref.rl.iters) + " iters");
  for (std::uint64_t seed : acceptance::kSeeds) {
    const acceptance::ArmRun run = acceptance::load_arm(runs, Algo::Bpo, seed);
    const double hard_trig = stratum(run.eval, "auto", "hard").at("trigger_rate").get<double>();
    const double easy_trig = stratum(run.eval, "auto", "easy").at("trigger_rate").get<double>();
    const double auto_hard = stratum(run.eval, "auto", "hard").at("accuracy").get<double>();
    const double think_hard = stratum(run.eval, "thinking", "hard").at("accuracy").get<double>();
    const double auto_tok = stratum(run.eval, "auto", "easy").at("mean_tokens").get<double>();
    const double think_tok = stratum(run.eval, "thinking", "easy").at("mean_tokens").get<double>();
    const double secs = run.manifest.at("wall_clock_seconds").get<double>();
    const std::string s = "seed " + std::to_string(seed) + " ";
    v.require(hard_trig >= 0.80, s + "hard trigger " + fmt(hard_trig, 3));
    v.require(easy_trig <= 0.30, s + "easy trigger " + fmt(easy_trig, 3));
    v.require(std::abs(auto_hard - think_hard) <= 0.03 + 1e-12,
              s + "hard acc auto " + fmt(auto_hard, 3) + " vs thinking " + fmt(think_hard, 3));
    v.require(auto_tok <= 0.5 * think_tok, s + "easy tokens auto " + fmt(auto_tok, 3) + " vs thinking " +
                                               fmt(think_tok, 3));
    v.require(secs <= 600.0, s + "wall " + fmt(secs, 4) + " s");
  }
  return v;
}

Verdict criterion_dilemma(const fs::path& runs) {
  Verdict v;
  int collapsed_seeds = 0;
  for (std::uint64_t seed : acceptance::kSeeds) {
    const acceptance::ArmRun grpo = acceptance::load_arm(runs, Algo::Grpo, seed);
    int run = 0, longest = 0;
    double lowest = 1.0;
    for (const MetricsRecord& m : grpo.metrics) {
      run = m.minority_share < 0.10 ? run + 1 : 0;
      longest = std::max(longest, run);
      lowest = std::min(lowest, m.minority_share);
    }
    if (longest >= 30) ++collapsed_seeds;
    v.detail << "grpo seed " << seed << " longest run below 10%: " << longest << " steps (min share "
             << fmt(lowest, 3) << "); ";

    const acceptance::ArmRun bpo = acceptance::load_arm(runs, Algo::Bpo, seed);
    const double g = static_cast<double>(bpo.cfg.rl.g);
    std::size_t unbalanced = 0, out_of_band = 0, probes = 0;
    double lo = 1.0, hi = 0.0;
    for (const MetricsRecord& m : bpo.metrics) {
      if (m.think_items != g || m.nothink_items != g) ++unbalanced;
      if (!m.probe) continue;
      ++probes;
      const double t = m.probe->trigger_rate;
      lo = std::min(lo, t);
      hi = std::max(hi, t);
      if (!(t > 0.05 && t < 0.95)) ++out_of_band;
    }
    v.require(unbalanced == 0, "bpo seed " + std::to_string(seed) + " unbalanced steps " + std::to_string(unbalanced));
    v.require(out_of_band == 0, "bpo seed " + std::to_string(seed) + " probe trigger in [" + fmt(lo, 3) + ", " +
                                    fmt(hi, 3) + "], " + std::to_string(out_of_band) + "/" + std::to_string(probes) +
                                    " probes outside (0.05, 0.95)");
  }
  v.require(collapsed_seeds >= 2, "grpo collapsed in " + std::to_string(collapsed_seeds) + "/3 seeds");
  return v;
}

RunConfig reduced_config(const fs::path& dir) {
  RunConfig c;
  c.seed = 1010;
  c.policy = PolicyDims{.window = 22, .embed = 6, .hidden = 32};
  c.pool_size = 400;
  c.sft.epochs = 3;
  c.rl.iters = 6;
  c.rl.batch_queries = 4;
  c.rl.probe_every = 2;
  c.eval = EvalConfig{.easy = 10, .hard = 20, .hard_min_steps = 4, .probe_easy = 5, .probe_hard = 5};
  c.output_dir = dir.string();
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Verdict criterion_reproducibility() {
  Verdict v;
  bpo::testing::TempDir dir("repro");
  run_experiment(reduced_config(dir.path() / "a"));
  run_experiment(reduced_config(dir.path() / "b"));
  for (const char* f : {"metrics.jsonl", "rl.ckpt", "sft.ckpt", "miner.ckpt", "corpus.jsonl", "eval_final.json"}) {
    const std::string a = slurp(dir.path() / "a" / f);
    v.require(!a.empty() && a == slurp(dir.path() / "b" / f), std::string(f) + " " + std::to_string(a.size()) + " bytes");
  }
  return v;
}

const std::map<int, std::string> kNames{
    {1, "gradient correctness"},      {2, "advantage properties"}, {3, "ratio-one equivalence"},
    {4, "clipping behavior"},         {5, "kl estimator"},         {6, "bi-mode structural invariants"},
    {7, "curation pipeline"},         {8, "end-to-end dynamics"},  {9, "grpo dilemma reproduction"},
    {10, "reproducibility"}};

bool run_criterion(int n, const fs::path& runs) {
  Verdict v;
  try {
    switch (n) {
      case 1: v = criterion_gradients(); break;
      case 2: v = criterion_advantages(); break;
      case 3: v = criterion_ratio_one(); break;
      case 4: v = criterion_clipping(); break;
      case 5: v = criterion_kl(); break;
      case 6: v = criterion_bimode(runs); break;
      case 7: v = criterion_curation(); break;
      case 8: v = criterion_dynamics(runs); break;
      case 9: v = criterion_dilemma(runs); break;
      case 10: v = criterion_reproducibility(); break;
      default: throw ContractViolation("no criterion " + std::to_string(n));
    }
  } catch (const std::exception& e) {
    v.pass = false;
    v.detail << "[error] " << e.what();
  }
  std::cout << "criterion " << n << " (" << kNames.at(n) << "): " << (v.pass ? "PASS" : "FAIL") << " | "
            << v.detail.str() << std::endl;
  return v.pass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  bool prepare = false;
  int criterion = 0;
  std::string runs = "acceptance_runs";
  app.add_flag("--prepare", prepare, "Build or reuse the per-seed BPO and GRPO runs");
  app.add_option("--criterion", criterion, "Run one criterion (1-10)")->check(CLI::Range(1, 10));
  app.add_option("--runs", runs, "Directory holding the per-seed runs");
  CLI11_PARSE(app, argc, argv);

  if (prepare) {
    try {
      std::cout << "preparing runs under " << runs << std::endl;
      acceptance::ensure_runs(runs, std::cout);
    } catch (const std::exception& e) {
      std::cerr << "prepare failed: " << e.what() << '\n';
      return 2;
    }
    if (criterion == 0) return 0;
  }
  if (criterion != 0) return run_criterion(criterion, runs) ? 0 : 1;
  int failed = 0;
  for (int n = 1; n <= 10; ++n) failed += !run_criterion(n, runs);
  return failed == 0 ? 0 : 1;
}
