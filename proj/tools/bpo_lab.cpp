// bpo_lab: curate, fine-tune, train and report bi-mode policies.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#if __has_include(<CLI11.hpp>)
#include <CLI11.hpp>
#else
#include <CLI/CLI.hpp>
#endif

#include "bpo/error.hpp"
#include "bpo/harness/config.hpp"
#include "bpo/harness/experiment.hpp"
#include "bpo/harness/report.hpp"
#include "check.hpp"

namespace fs = std::filesystem;

namespace {

struct Common {
  std::string config;
  std::string out;
  std::int64_t seed = -1;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "JSON run configuration (defaults when omitted)")->check(CLI::ExistingFile);
  cmd->add_option("--out", c.out, "Run directory (default: $BPO_LAB_OUT/run-<algo>-seed<seed>)");
  cmd->add_option("--seed", c.seed, "Override the configured seed")->check(CLI::NonNegativeNumber);
}

bpo::RunConfig resolve(const Common& c) {
  bpo::RunConfig cfg = c.config.empty() ? bpo::RunConfig{} : bpo::load_config(c.config);
  if (c.seed >= 0) cfg.seed = static_cast<std::uint64_t>(c.seed);
  if (!c.out.empty()) {
    cfg.output_dir = c.out;
  } else if (cfg.output_dir.empty()) {
    const char* root = std::getenv("BPO_LAB_OUT");
    cfg.output_dir = (fs::path(root != nullptr ? root : "runs") /
                      ("run-" + std::string(bpo::to_string(cfg.algo)) + "-seed" + std::to_string(cfg.seed)))
                         .string();
  }
  cfg.validate();
  return cfg;
}

void snapshot_config(const bpo::RunConfig& cfg) {
  std::ofstream out(fs::path(cfg.output_dir) / "config.json");
  if (!out) throw bpo::IoError("cannot write config snapshot in " + cfg.output_dir);
  out << bpo::to_json(cfg).dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bi-mode policy optimization lab"};
  app.require_subcommand(1);

  Common curate_opts, sft_opts, rl_opts, eval_opts, run_opts, report_opts;
  std::string algo;
  std::string from;
  std::int64_t check_seed = 7;
  std::string check_out;

  auto* curate = app.add_subcommand("curate", "Build eval suite and pool, mine labels, write corpus.jsonl");
  add_common(curate, curate_opts);
  auto* sft = app.add_subcommand("sft", "Mixed-format fine-tuning on corpus.jsonl, writes sft.ckpt");
  add_common(sft, sft_opts);
  auto* rl = app.add_subcommand("rl", "RL from sft.ckpt, writes metrics.jsonl and rl.ckpt");
  add_common(rl, rl_opts);
  rl->add_option("--algo", algo, "Training arm")->check(CLI::IsMember({"bpo", "grpo"}));
  rl->add_option("--from", from, "Starting checkpoint (default: <out>/sft.ckpt)")->check(CLI::ExistingFile);
  auto* eval = app.add_subcommand("eval", "Greedy evaluation of sft.ckpt and rl.ckpt in all modes");
  add_common(eval, eval_opts);
  auto* report = app.add_subcommand("report", "Write report/ tables from metrics.jsonl and eval_final.json");
  add_common(report, report_opts);
  auto* run = app.add_subcommand("run", "curate, sft, rl and eval in one locked run directory");
  add_common(run, run_opts);
  run->add_option("--algo", algo, "Training arm")->check(CLI::IsMember({"bpo", "grpo"}));
  auto* check = app.add_subcommand("check", "Gradient and invariant checks on a small model");
  check->add_option("--seed", check_seed, "Seed for the checks")->check(CLI::NonNegativeNumber);
  check->add_option("--config", check_out, "Accepted for symmetry; the checks use fixed small dims");
  check->add_option("--out", check_out, "Accepted for symmetry; nothing is written");

  CLI11_PARSE(app, argc, argv);

  try {
    const auto staged = [](const Common& opts, const std::string& arm, auto&& body) {
      bpo::RunConfig cfg = resolve(opts);
      if (!arm.empty()) cfg.algo = bpo::parse_algo(arm);
      const bpo::RunLock lock(cfg.output_dir);
      snapshot_config(cfg);
      body(cfg);
      std::cout << cfg.output_dir << '\n';
    };
    if (*curate) {
      staged(curate_opts, "", [](const bpo::RunConfig& cfg) { bpo::stage_curate(cfg, cfg.output_dir); });
    } else if (*sft) {
      staged(sft_opts, "", [](const bpo::RunConfig& cfg) { bpo::stage_sft(cfg, cfg.output_dir); });
    } else if (*rl) {
      staged(rl_opts, algo, [&](const bpo::RunConfig& cfg) { bpo::stage_rl(cfg, cfg.output_dir, from); });
    } else if (*eval) {
      staged(eval_opts, "", [](const bpo::RunConfig& cfg) { bpo::stage_eval(cfg, cfg.output_dir); });
    } else if (*report) {
      const bpo::RunConfig cfg = resolve(report_opts);
      const bpo::ReportFiles files = bpo::write_report(cfg.output_dir);
      std::cout << files.trigger_rate.parent_path().string() << '\n';
    } else if (*run) {
      bpo::RunConfig cfg = resolve(run_opts);
      if (!algo.empty()) cfg.algo = bpo::parse_algo(algo);
      std::cout << bpo::run_experiment(cfg).string() << '\n';
    } else if (*check) {
      const int failures = bpo::tools::run_checks(static_cast<std::uint64_t>(check_seed), std::cout);
      return failures == 0 ? 0 : 1;
    }
  } catch (const bpo::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
