#include <benchmark/benchmark.h>

#include "bpo/anneal/curation.hpp"
#include "bpo/anneal/sft.hpp"
#include "bpo/harness/config.hpp"
#include "bpo/optim/objective.hpp"
#include "bpo/policy/policy.hpp"
#include "bpo/rollout/rollout.hpp"

namespace {

using namespace bpo;

const PolicyDims kDims = RunConfig{}.policy;

TokenSeq sample_context() {
  const TaskInstance t = make_task("2*3+4*2+7");
  TokenSeq seq = build_prompt(t, Mode::Thinking);
  for (TokenId x : teacher_trace(t)) seq.push_back(x);
  return seq;
}

void BM_ForwardReference(benchmark::State& state) {
  const PolicyParams p = init_params(1, kDims);
  const TokenSeq seq = sample_context();
  const TokenSeq ctx = context_at(seq, seq.size(), kDims);
  for (auto _ : state) benchmark::DoNotOptimize(forward_step(p, ctx));
}
BENCHMARK(BM_ForwardReference);

void BM_ForwardProjected(benchmark::State& state) {
  const PolicyParams p = init_params(1, kDims);
  const InputProjection proj(p);
  const TokenSeq seq = sample_context();
  for (auto _ : state) benchmark::DoNotOptimize(proj.forward_at(seq, seq.size()));
}
BENCHMARK(BM_ForwardProjected);

void BM_GenerateRollout(benchmark::State& state) {
  const PolicyParams p = init_params(2, kDims);
  const InputProjection proj(p);
  Rng rng = make_rng(2, Stream::kTest);
  const TaskInstance t = make_task("2*3+4*2+7");
  for (auto _ : state) benchmark::DoNotOptimize(generate_rollout(proj, t, Mode::Auto, GenConfig{}, rng));
}
BENCHMARK(BM_GenerateRollout);

// One BPO objective + gradient over a default-sized batch (32 queries, g = 4).
void BM_BpoObjective(benchmark::State& state) {
  const PolicyParams p = init_params(3, kDims);
  Rng rng = make_rng(3, Stream::kTest);
  std::vector<RolloutGroup> groups;
  BpoConfig cfg;
  for (int q = 0; q < cfg.batch_queries; ++q) {
    groups.push_back(generate_bimode_group(p, sample_task(rng, TaskSpec{}), cfg.g, GenConfig{}, rng));
    assign_bimode_advantages(groups.back(), cfg);
  }
  const ReferenceSnapshot ref{p, "self"};
  for (auto _ : state) benchmark::DoNotOptimize(bpo_objective(p, ref, groups, cfg).total);
}
BENCHMARK(BM_BpoObjective)->Unit(benchmark::kMillisecond);

void BM_SftLossAndGrad(benchmark::State& state) {
  const PolicyParams p = init_params(4, kDims);
  Rng rng = make_rng(4, Stream::kTest);
  std::vector<CurationItem> items;
  for (int i = 0; i < 32; ++i)
    items.push_back(build_item(sample_task(rng, TaskSpec{}), i % 2 ? ModeLabel::Direct : ModeLabel::Reasoning,
                               Heuristic::Difficulty));
  for (auto _ : state) {
    GradientVector g(p.size());
    benchmark::DoNotOptimize(sft_loss(p, items, &g));
  }
}
BENCHMARK(BM_SftLossAndGrad)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
