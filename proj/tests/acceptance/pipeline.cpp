#include "pipeline.hpp"

#include <chrono>
#include <fstream>

#include "bpo/error.hpp"
#include "bpo/harness/experiment.hpp"

namespace fs = std::filesystem;

namespace bpo::acceptance {

namespace {

constexpr const char* kDoneMarker = "arm_done.json";

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

// The GRPO arm starts from the BPO arm's SFT checkpoint under the same seed.
void run_grpo_arm(const RunConfig& bpo_cfg, const RunConfig& cfg, std::ostream& log) {
  const fs::path dir(cfg.output_dir);
  fs::remove_all(dir);
  const RunLock lock(dir);
  const RunPaths src(bpo_cfg.output_dir);
  const RunPaths dst(dir);
  for (const auto& [from, to] : {std::pair{src.eval_suite(), dst.eval_suite()}, {src.pool(), dst.pool()},
                                 {src.corpus(), dst.corpus()}, {src.curation_report(), dst.curation_report()},
                                 {src.miner_ckpt(), dst.miner_ckpt()}, {src.sft_ckpt(), dst.sft_ckpt()},
                                 {src.sft_log(), dst.sft_log()}})
    fs::copy_file(from, to, fs::copy_options::overwrite_existing);
  write_json(dst.config(), to_json(cfg));
  const auto t0 = std::chrono::steady_clock::now();
  stage_rl(cfg, dir);
  stage_eval(cfg, dir);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_json(dst.manifest(), {{"seed", cfg.seed}, {"algo", "grpo"}, {"status", "complete"},
                              {"rl_and_eval_seconds", secs}, {"sft_from", src.sft_ckpt().string()}});
  write_json(dir / kDoneMarker, to_json(cfg));
  log << "  grpo arm seed " << cfg.seed << ": " << secs << " s\n";
}

}  // namespace

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad json in " + path.string() + ": " + e.what());
  }
}

fs::path arm_dir(const fs::path& root, Algo algo, std::uint64_t seed) {
  return root / (std::string(to_string(algo)) + "-seed" + std::to_string(seed));
}

RunConfig arm_config(const fs::path& root, Algo algo, std::uint64_t seed) {
  RunConfig cfg;
  cfg.seed = seed;
  cfg.algo = algo;
  cfg.output_dir = arm_dir(root, algo, seed).string();
  return cfg;
}

bool arm_complete(const RunConfig& cfg) {
  const RunPaths p(cfg.output_dir);
  try {
    if (read_json(p.config()) != to_json(cfg)) return false;
    if (read_json(p.manifest()).value("status", "") != "complete") return false;
    if (cfg.algo == Algo::Grpo && read_json(p.dir / kDoneMarker) != to_json(cfg)) return false;
    return fs::exists(p.eval_final()) && fs::exists(p.metrics()) && fs::exists(p.rl_ckpt());
  } catch (const IoError&) {
    return false;
  }
}

void ensure_runs(const fs::path& root, std::ostream& log) {
  fs::create_directories(root);
  for (std::uint64_t seed : kSeeds) {
    const RunConfig bpo = arm_config(root, Algo::Bpo, seed);
    bool fresh_bpo = false;
    if (arm_complete(bpo)) {
      log << "  bpo arm seed " << seed << ": reused\n";
    } else {
      fs::remove_all(bpo.output_dir);
      const auto t0 = std::chrono::steady_clock::now();
      run_experiment(bpo);
      log << "  bpo arm seed " << seed << ": "
          << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() << " s\n";
      fresh_bpo = true;
    }
    const RunConfig grpo = arm_config(root, Algo::Grpo, seed);
    if (!fresh_bpo && arm_complete(grpo))
      log << "  grpo arm seed " << seed << ": reused\n";
    else
      run_grpo_arm(bpo, grpo, log);
  }
}

ArmRun load_arm(const fs::path& root, Algo algo, std::uint64_t seed) {
  ArmRun run{arm_config(root, algo, seed), {}, {}, {}};
  if (!arm_complete(run.cfg))
    throw IoError("no finished " + std::string(to_string(algo)) + " run for seed " + std::to_string(seed) +
                  " under " + root.string() + " (run bpo_acceptance --prepare)");
  const RunPaths p(run.cfg.output_dir);
  run.eval = read_json(p.eval_final());
  run.manifest = read_json(p.manifest());
  run.metrics = load_metrics(p.metrics().string());
  return run;
}

}  // namespace bpo::acceptance
