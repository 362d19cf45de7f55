#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "bpo/harness/config.hpp"
#include "bpo/harness/evaluate.hpp"

namespace bpo {

// File names inside one run directory.
struct RunPaths {
  std::filesystem::path dir;

  explicit RunPaths(std::filesystem::path d) : dir(std::move(d)) {}
  std::filesystem::path config() const { return dir / "config.json"; }
  std::filesystem::path eval_suite() const { return dir / "eval_suite.jsonl"; }
  std::filesystem::path pool() const { return dir / "pool.jsonl"; }
  std::filesystem::path corpus() const { return dir / "corpus.jsonl"; }
  std::filesystem::path curation_report() const { return dir / "curation.json"; }
  std::filesystem::path miner_ckpt() const { return dir / "miner.ckpt"; }
  std::filesystem::path sft_ckpt() const { return dir / "sft.ckpt"; }
  std::filesystem::path sft_log() const { return dir / "sft_loss.jsonl"; }
  std::filesystem::path rl_ckpt() const { return dir / "rl.ckpt"; }
  std::filesystem::path metrics() const { return dir / "metrics.jsonl"; }
  std::filesystem::path eval_final() const { return dir / "eval_final.json"; }
  std::filesystem::path manifest() const { return dir / "manifest.json"; }
  std::filesystem::path lock() const { return dir / "run.lock"; }
  std::filesystem::path report_dir() const { return dir / "report"; }
};

// Exclusive ownership of a run directory for the lifetime of the object.
// Creating the directory or the lock file failing is an IoError.
class RunLock {
 public:
  explicit RunLock(const std::filesystem::path& dir);
  ~RunLock();
  RunLock(const RunLock&) = delete;
  RunLock& operator=(const RunLock&) = delete;

 private:
  std::filesystem::path path_;
};

// Held-out tasks, distinct expressions, from their own RNG substream.
EvalSuite make_eval_suite(const RunConfig& cfg);
EvalSuite make_probe_suite(const RunConfig& cfg, const EvalSuite& eval);
TaskSource make_training_source(const RunConfig& cfg, const EvalSuite& eval);

// Stages. Each reads its inputs from and writes its outputs to `dir`.
void stage_curate(const RunConfig& cfg, const std::filesystem::path& dir);
void stage_sft(const RunConfig& cfg, const std::filesystem::path& dir);
// Starts from `from` (default: dir/sft.ckpt); writes metrics.jsonl and rl.ckpt.
void stage_rl(const RunConfig& cfg, const std::filesystem::path& dir, const std::filesystem::path& from = {});
// Evaluates post-SFT and post-RL checkpoints in all three modes.
void stage_eval(const RunConfig& cfg, const std::filesystem::path& dir);

// curate -> sft -> rl -> eval, plus config snapshot and manifest.
std::filesystem::path run_experiment(const RunConfig& cfg);

}  // namespace bpo
