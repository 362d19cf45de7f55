#include "bpo/harness/report.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

#include "bpo/error.hpp"
#include "bpo/harness/metrics.hpp"

namespace fs = std::filesystem;

namespace bpo {

namespace {

std::ofstream open_table(const fs::path& path, const char* header) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << std::setprecision(6) << std::fixed << header << '\n';
  return out;
}

std::string na_or(const nlohmann::json& j) {
  if (j.is_null()) return "NA";
  std::ostringstream s;
  s << std::setprecision(6) << std::fixed << j.get<double>();
  return s.str();
}

const char* mode_key(const std::string& label) {
  if (label == "N-T") return "nonthinking";
  if (label == "A-T") return "auto";
  return "thinking";
}

}  // namespace

ReportFiles write_report(const fs::path& run_dir) {
  const fs::path metrics_path = run_dir / "metrics.jsonl";
  if (!fs::exists(metrics_path)) throw IoError("missing metrics stream " + metrics_path.string());
  const std::vector<MetricsRecord> records = load_metrics(metrics_path.string());
  if (records.empty()) throw ContractViolation("no RL metrics in " + metrics_path.string());

  const fs::path dir = run_dir / "report";
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  ReportFiles files;
  files.trigger_rate = dir / "trigger_rate.tsv";
  files.accuracy = dir / "accuracy.tsv";
  files.mode_items = dir / "mode_items.tsv";

  auto trig = open_table(files.trigger_rate, "step\teasy_rate\thard_rate");
  auto acc = open_table(files.accuracy, "step\tacc_think\tacc_nothink\tacc_auto");
  auto items = open_table(files.mode_items,
                          "step\tthink_items\tnothink_items\tthink_correct\tnothink_correct\tminority_share");
  for (const auto& r : records) {
    items << r.step << '\t' << r.think_items << '\t' << r.nothink_items << '\t' << r.think_correct_items << '\t'
          << r.nothink_correct_items << '\t' << r.minority_share << '\n';
    if (!r.probe) continue;
    trig << r.step << '\t' << r.probe->trigger_rate_easy << '\t' << r.probe->trigger_rate_hard << '\n';
    acc << r.step << '\t' << r.probe->acc_think << '\t' << r.probe->acc_nothink << '\t' << r.probe->acc_auto << '\n';
  }

  const fs::path eval_path = run_dir / "eval_final.json";
  if (fs::exists(eval_path)) {
    std::ifstream in(eval_path);
    const nlohmann::json eval = nlohmann::json::parse(in);
    files.comparison = dir / "comparison.txt";
    files.token_budget = dir / "token_budget.tsv";
    auto cmp = open_table(files.comparison, "checkpoint\tmode\taccuracy\teasy_acc\thard_acc\ttrigger_rate");
    auto tok = open_table(files.token_budget, "checkpoint\tmode\teasy_tokens\thard_tokens\tall_tokens");
    for (const char* ckpt : {"post_sft", "post_rl"}) {
      if (!eval.contains(ckpt)) continue;
      for (const auto& label : comparison_modes()) {
        const auto& e = eval.at(ckpt).at(mode_key(label));
        cmp << ckpt << '\t' << label << '\t' << e.at("all").at("accuracy").get<double>() << '\t'
            << e.at("easy").at("accuracy").get<double>() << '\t' << e.at("hard").at("accuracy").get<double>() << '\t'
            << na_or(e.at("all").at("trigger_rate")) << '\n';
        tok << ckpt << '\t' << label << '\t' << e.at("easy").at("mean_tokens").get<double>() << '\t'
            << e.at("hard").at("mean_tokens").get<double>() << '\t' << e.at("all").at("mean_tokens").get<double>()
            << '\n';
      }
    }
  }
  return files;
}

}  // namespace bpo
