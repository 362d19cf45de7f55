#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace bpo {

// Files written under <run_dir>/report. All tables are tab-separated with a
// fixed header line.
struct ReportFiles {
  std::filesystem::path trigger_rate;  // step easy_rate hard_rate
  std::filesystem::path accuracy;      // step acc_think acc_nothink acc_auto
  std::filesystem::path mode_items;    // step think_items nothink_items think_correct nothink_correct minority_share
  std::filesystem::path comparison;    // checkpoint mode accuracy easy hard trigger_rate (absent without eval_final.json)
  std::filesystem::path token_budget;  // checkpoint mode easy_tokens hard_tokens (absent without eval_final.json)
};

// Reads metrics.jsonl (and eval_final.json when present). A missing stream
// is an IoError; a stream without records is a ContractViolation.
ReportFiles write_report(const std::filesystem::path& run_dir);

// Row labels of the final comparison table, in order.
inline const std::vector<std::string>& comparison_modes() {
  static const std::vector<std::string> modes{"N-T", "A-T", "T"};
  return modes;
}

}  // namespace bpo
