#include "bpo/harness/experiment.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <fstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "bpo/anneal/curation.hpp"
#include "bpo/anneal/sft.hpp"
#include "bpo/error.hpp"
#include "bpo/harness/metrics.hpp"
#include "bpo/policy/checkpoint.hpp"

namespace fs = std::filesystem;

namespace bpo {

RunLock::RunLock(const fs::path& dir) : path_(dir / "run.lock") {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create run directory " + dir.string() + ": " + ec.message());
  std::FILE* f = std::fopen(path_.c_str(), "wx");
  if (f == nullptr) {
    if (fs::exists(path_)) throw IoError("run directory is locked by another run: " + path_.string());
    throw IoError("cannot write to run directory " + dir.string());
  }
  std::fclose(f);
}

RunLock::~RunLock() {
  std::error_code ec;
  fs::remove(path_, ec);
}

namespace {

std::vector<TaskInstance> distinct_tasks(Rng& rng, int count, int lo, int hi, const std::string& what) {
  std::vector<TaskInstance> out;
  std::unordered_set<std::string> seen;
  int attempts = 0;
  while (static_cast<int>(out.size()) < count) {
    if (++attempts > 1000 * (count + 10))
      throw ConfigError("cannot draw " + std::to_string(count) + " distinct " + what + " tasks");
    TaskInstance t = sample_task_with_steps(rng, uniform_int(rng, lo, hi), TaskKind::Objective);
    if (seen.insert(t.expression()).second) out.push_back(std::move(t));
  }
  return out;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}


std::vector<TaskInstance> make_pool(const RunConfig& cfg, const TaskSource& source) {
  Rng rng = make_rng(cfg.seed, Stream::kPool);
  return source.draw_batch(rng, static_cast<std::size_t>(cfg.pool_size));
}

nlohmann::json eval_all_modes(const PolicyParams& params, const EvalSuite& suite, std::size_t max_len) {
  nlohmann::json j;
  for (Mode m : {Mode::NonThinking, Mode::Auto, Mode::Thinking})
    j[std::string(to_string(m))] = to_json(evaluate(params, suite, m, max_len));
  return j;
}

}  // namespace

EvalSuite make_eval_suite(const RunConfig& cfg) {
  EvalSuite suite;
  Rng easy_rng = make_rng(cfg.seed, Stream::kEvalSuite, 0);
  suite.easy = distinct_tasks(easy_rng, cfg.eval.easy, cfg.task.min_steps, cfg.task.easy_threshold, "easy");
  Rng hard_rng = make_rng(cfg.seed, Stream::kEvalSuite, 1);
  suite.hard = distinct_tasks(hard_rng, cfg.eval.hard, cfg.eval.hard_min_steps, cfg.task.max_steps, "hard");
  return suite;
}

EvalSuite make_probe_suite(const RunConfig& cfg, const EvalSuite& eval) {
  return eval.prefix(static_cast<std::size_t>(cfg.eval.probe_easy), static_cast<std::size_t>(cfg.eval.probe_hard));
}

TaskSource make_training_source(const RunConfig& cfg, const EvalSuite& eval) {
  TaskSource src{cfg.task, {}};
  for (const auto& t : eval.easy) src.excluded.insert(t.expression());
  for (const auto& t : eval.hard) src.excluded.insert(t.expression());
  return src;
}

void stage_curate(const RunConfig& cfg, const fs::path& dir) {
  const RunPaths paths(dir);
  const EvalSuite eval = make_eval_suite(cfg);
  std::vector<TaskInstance> eval_tasks = eval.easy;
  eval_tasks.insert(eval_tasks.end(), eval.hard.begin(), eval.hard.end());
  save_tasks(paths.eval_suite().string(), eval_tasks);

  const TaskSource source = make_training_source(cfg, eval);
  const std::vector<TaskInstance> pool = make_pool(cfg, source);
  save_tasks(paths.pool().string(), pool);

  // The miner is the initial policy, optionally after a direct-answer
  // warm-up on the pool.
  PolicyParams miner = init_params(cfg.seed, cfg.policy);
  if (cfg.miner_warmup_epochs > 0) {
    std::vector<CurationItem> direct;
    direct.reserve(pool.size());
    for (const auto& t : pool) direct.push_back(build_item(t, ModeLabel::Direct, Heuristic::Performance));
    SftConfig warm = cfg.sft;
    warm.epochs = cfg.miner_warmup_epochs;
    warm.shuffle_seed = cfg.sft.shuffle_seed ^ static_cast<std::uint64_t>(Stream::kMinerWarmup);
    miner = sft_train(miner, direct, warm).params;
  }
  save_checkpoint(miner, paths.miner_ckpt().string());

  const CurationOutcome outcome = curate(pool, miner, cfg.curation, cfg.seed);
  save_corpus(paths.corpus().string(), outcome.items);

  nlohmann::json report;
  report["pool"] = pool.size();
  report["kept"] = outcome.items.size();
  report["reasoning"] = outcome.reasoning;
  report["direct"] = outcome.direct;
  report["rejected"] = {{"format", outcome.report.format},
                        {"keyword", outcome.report.keyword},
                        {"consistency", outcome.report.consistency},
                        {"duplicate", outcome.report.duplicate}};
  nlohmann::json by_steps = nlohmann::json::object();
  for (const auto& item : outcome.items) {
    auto& row = by_steps[std::to_string(item.task.steps)];
    if (row.is_null()) row = {{"reasoning", 0}, {"direct", 0}};
    row[std::string(to_string(item.label))] = row[std::string(to_string(item.label))].get<int>() + 1;
  }
  report["labels_by_steps"] = by_steps;
  write_json(paths.curation_report(), report);
}

void stage_sft(const RunConfig& cfg, const fs::path& dir) {
  const RunPaths paths(dir);
  const std::vector<CurationItem> corpus = load_corpus(paths.corpus().string());
  const PolicyParams start = fs::exists(paths.miner_ckpt()) ? load_checkpoint(paths.miner_ckpt().string())
                                                             : init_params(cfg.seed, cfg.policy);
  std::ofstream log(paths.sft_log());
  if (!log) throw IoError("cannot write " + paths.sft_log().string());
  const SftResult res = sft_train(start, corpus, cfg.sft, [&](int epoch, double loss) {
    log << nlohmann::json{{"epoch", epoch}, {"loss", loss}}.dump() << '\n' << std::flush;
  });
  save_checkpoint(res.params, paths.sft_ckpt().string());
}

void stage_rl(const RunConfig& cfg, const fs::path& dir, const fs::path& from) {
  const RunPaths paths(dir);
  const PolicyParams start = load_checkpoint((from.empty() ? paths.sft_ckpt() : from).string());
  const EvalSuite eval = make_eval_suite(cfg);

  RlSetup setup;
  setup.algo = cfg.algo;
  setup.cfg = cfg.rl;
  setup.gen = cfg.generation;
  setup.tasks = make_training_source(cfg, eval);
  setup.probe = make_probe_suite(cfg, eval);
  setup.seed = cfg.seed;

  std::ofstream metrics(paths.metrics(), std::ios::trunc);
  if (!metrics) throw IoError("cannot write " + paths.metrics().string());
  const RlResult res = rl_train(start, setup, [&](const MetricsRecord& rec) {
    metrics << to_json(rec).dump() << '\n' << std::flush;
  });
  save_checkpoint(res.params, paths.rl_ckpt().string());
}

void stage_eval(const RunConfig& cfg, const fs::path& dir) {
  const RunPaths paths(dir);
  const EvalSuite eval = make_eval_suite(cfg);
  nlohmann::json out;
  const std::size_t len = cfg.generation.max_gen_len;
  out["post_sft"] = eval_all_modes(load_checkpoint(paths.sft_ckpt().string()), eval, len);
  if (fs::exists(paths.rl_ckpt())) out["post_rl"] = eval_all_modes(load_checkpoint(paths.rl_ckpt().string()), eval, len);
  write_json(paths.eval_final(), out);
}

fs::path run_experiment(const RunConfig& cfg) {
  cfg.validate();
  if (cfg.output_dir.empty()) throw ConfigError("run_experiment needs an output directory");
  const fs::path dir(cfg.output_dir);
  const RunLock lock(dir);
  const RunPaths paths(dir);
  write_json(paths.config(), to_json(cfg));

  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();
  nlohmann::json manifest;
  manifest["seed"] = cfg.seed;
  manifest["algo"] = to_string(cfg.algo);
  manifest["stages"] = nlohmann::json::array();

  const std::pair<const char*, std::function<void()>> stages[] = {
      {"curate", [&] { stage_curate(cfg, dir); }},
      {"sft", [&] { stage_sft(cfg, dir); }},
      {"rl", [&] { stage_rl(cfg, dir); }},
      {"eval", [&] { stage_eval(cfg, dir); }},
  };
  for (const auto& [name, run] : stages) {
    const auto s0 = Clock::now();
    try {
      run();
    } catch (const std::exception& e) {
      manifest["status"] = "failed";
      manifest["failed_stage"] = name;
      manifest["error"] = e.what();
      manifest["wall_clock_seconds"] = std::chrono::duration<double>(Clock::now() - t0).count();
      write_json(paths.manifest(), manifest);
      throw;
    }
    manifest["stages"].push_back(
        {{"name", name}, {"seconds", std::chrono::duration<double>(Clock::now() - s0).count()}});
  }
  manifest["status"] = "complete";
  manifest["wall_clock_seconds"] = std::chrono::duration<double>(Clock::now() - t0).count();
  write_json(paths.manifest(), manifest);
  return dir;
}

}  // namespace bpo
