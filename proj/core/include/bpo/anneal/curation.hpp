#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bpo/env/task.hpp"
#include "bpo/policy/policy.hpp"

namespace bpo {

enum class ModeLabel { Reasoning, Direct };
enum class DirectRule { AnyCorrect, AllCorrect };
enum class Heuristic { Performance, Difficulty };

std::string_view to_string(ModeLabel label);
std::string_view to_string(DirectRule rule);
std::string_view to_string(Heuristic h);
ModeLabel parse_mode_label(std::string_view text);
DirectRule parse_direct_rule(std::string_view text);
Heuristic parse_heuristic(std::string_view text);

struct CurationConfig {
  int samples = 8;  // N attempts per objective query
  double mining_temperature = 1.0;
  DirectRule direct_rule = DirectRule::AnyCorrect;
  int difficulty_threshold = 2;  // subjective: steps above this need reasoning
  bool dedup = true;
  std::size_t max_gen_len = 24;

  void validate(const TaskSpec& spec) const;
};

struct MiningResult {
  ModeLabel label = ModeLabel::Reasoning;
  int correct = 0;
  int attempts = 0;
};

// 0 correct -> Reasoning; otherwise Direct (AnyCorrect) or Direct only when
// every attempt succeeded (AllCorrect).
ModeLabel label_from_mining(int correct, int attempts, DirectRule rule);

// Hard mining: N Auto-mode attempts by the miner at mining_temperature.
MiningResult classify_objective(const TaskInstance& task, const PolicyParams& miner, const CurationConfig& cfg,
                                Rng& rng);
MiningResult classify_objective(const TaskInstance& task, const InputProjection& miner, const CurationConfig& cfg,
                                Rng& rng);

// Procedural annotator: steps > difficulty_threshold -> Reasoning.
ModeLabel classify_subjective(const TaskInstance& task, const CurationConfig& cfg);

struct CurationItem {
  TaskInstance task;
  ModeLabel label = ModeLabel::Direct;
  TokenSeq response;  // <think> trace? </think> answer <eos>
  Heuristic source = Heuristic::Performance;
};

CurationItem build_item(const TaskInstance& task, ModeLabel label, Heuristic source);

// True iff the response parses as `<think> digit* </think> digit <eos>` with a
// body that is non-empty exactly for Reasoning items.
bool item_parses(const CurationItem& item);

struct FilterReport {
  std::size_t format = 0;
  std::size_t keyword = 0;
  std::size_t consistency = 0;
  std::size_t duplicate = 0;

  std::size_t rejected() const { return format + keyword + consistency + duplicate; }
};

struct FilterResult {
  std::vector<CurationItem> kept;
  FilterReport report;
};

// Keyword filter rejects think spans holding <eos>, <sep>, <bos>, <pad> or a
// nested <think>; consistency rejects answers (or final trace digits) that
// differ from the task answer; dedup keeps the first copy of a task.
FilterResult filter_items(std::span<const CurationItem> items, bool dedup);

struct CurationOutcome {
  std::vector<CurationItem> items;  // after filtering
  FilterReport report;
  std::vector<MiningResult> mining;  // one per objective pool task, in pool order
  std::size_t reasoning = 0;
  std::size_t direct = 0;
};

// Routes each pool task through the heuristic matching its kind, builds the
// items and filters them. Mining for pool task i uses substream (seed, i).
CurationOutcome curate(std::span<const TaskInstance> pool, const PolicyParams& miner, const CurationConfig& cfg,
                       std::uint64_t seed);

std::string item_record(const CurationItem& item);
CurationItem parse_item_record(std::string_view line);
void save_corpus(const std::string& path, std::span<const CurationItem> items);
std::vector<CurationItem> load_corpus(const std::string& path);

}  // namespace bpo
