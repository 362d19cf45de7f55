#include "bpo/anneal/curation.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "bpo/error.hpp"
#include "bpo/rollout/rollout.hpp"

namespace bpo {

std::string_view to_string(ModeLabel label) { return label == ModeLabel::Reasoning ? "reasoning" : "direct"; }
std::string_view to_string(DirectRule rule) { return rule == DirectRule::AnyCorrect ? "any_correct" : "all_correct"; }
std::string_view to_string(Heuristic h) { return h == Heuristic::Performance ? "performance" : "difficulty"; }

ModeLabel parse_mode_label(std::string_view text) {
  if (text == "reasoning") return ModeLabel::Reasoning;
  if (text == "direct") return ModeLabel::Direct;
  throw IoError("unknown mode label '" + std::string(text) + "'");
}

DirectRule parse_direct_rule(std::string_view text) {
  if (text == "any_correct") return DirectRule::AnyCorrect;
  if (text == "all_correct") return DirectRule::AllCorrect;
  throw ConfigError("unknown direct rule '" + std::string(text) + "'");
}

Heuristic parse_heuristic(std::string_view text) {
  if (text == "performance") return Heuristic::Performance;
  if (text == "difficulty") return Heuristic::Difficulty;
  throw IoError("unknown heuristic '" + std::string(text) + "'");
}

void CurationConfig::validate(const TaskSpec& spec) const {
  if (samples < 1) throw ConfigError("curation.samples must be >= 1");
  if (!(mining_temperature >= 0.0)) throw ConfigError("curation.mining_temperature must be >= 0");
  if (difficulty_threshold < spec.min_steps || difficulty_threshold > spec.max_steps)
    throw ConfigError("curation.difficulty_threshold must lie within [min_steps, max_steps]");
  if (max_gen_len < 2) throw ConfigError("curation.max_gen_len must be >= 2");
}

ModeLabel label_from_mining(int correct, int attempts, DirectRule rule) {
  if (correct == 0) return ModeLabel::Reasoning;
  if (rule == DirectRule::AllCorrect && correct < attempts) return ModeLabel::Reasoning;
  return ModeLabel::Direct;
}

MiningResult classify_objective(const TaskInstance& task, const PolicyParams& miner, const CurationConfig& cfg,
                                Rng& rng) {
  return classify_objective(task, InputProjection(miner), cfg, rng);
}

MiningResult classify_objective(const TaskInstance& task, const InputProjection& miner, const CurationConfig& cfg,
                                Rng& rng) {
  MiningResult res;
  const GenConfig gen{cfg.mining_temperature, cfg.max_gen_len};
  for (int i = 0; i < cfg.samples; ++i) {
    const Rollout r = generate_rollout(miner, task, Mode::Auto, gen, rng);
    if (r.reward == 1.0) ++res.correct;
  }
  res.attempts = cfg.samples;
  res.label = label_from_mining(res.correct, res.attempts, cfg.direct_rule);
  return res;
}

ModeLabel classify_subjective(const TaskInstance& task, const CurationConfig& cfg) {
  return task.steps > cfg.difficulty_threshold ? ModeLabel::Reasoning : ModeLabel::Direct;
}

CurationItem build_item(const TaskInstance& task, ModeLabel label, Heuristic source) {
  CurationItem item{task, label, {}, source};
  item.response.push_back(tok::kThinkOpen);
  if (label == ModeLabel::Reasoning) {
    const TokenSeq trace = teacher_trace(task);
    item.response.insert(item.response.end(), trace.begin(), trace.end());
  }
  item.response.push_back(tok::kThinkClose);
  item.response.push_back(task.answer);
  item.response.push_back(tok::kEos);
  return item;
}

namespace {

enum class Verdict { Ok, Format, Keyword, Consistency };

bool forbidden_in_span(TokenId t) {
  return t == tok::kEos || t == tok::kSep || t == tok::kBos || t == tok::kPad || t == tok::kThinkOpen;
}

Verdict inspect(const CurationItem& item) {
  const TokenSeq& r = item.response;
  if (r.size() < 4 || r.front() != tok::kThinkOpen) return Verdict::Format;
  const auto close = std::find(r.begin() + 1, r.end(), tok::kThinkClose);
  if (close == r.end()) return Verdict::Format;
  const std::span<const TokenId> body(r.begin() + 1, close);
  if (std::any_of(body.begin(), body.end(), forbidden_in_span)) return Verdict::Keyword;
  if (!std::all_of(body.begin(), body.end(), tok::is_digit)) return Verdict::Format;
  if ((item.label == ModeLabel::Reasoning) == body.empty()) return Verdict::Format;
  if (r.end() - close != 3 || !tok::is_digit(*(close + 1)) || *(close + 2) != tok::kEos) return Verdict::Format;
  if (*(close + 1) != item.task.answer) return Verdict::Consistency;
  if (!body.empty() && body.back() != item.task.answer) return Verdict::Consistency;
  return Verdict::Ok;
}

}  // namespace

bool item_parses(const CurationItem& item) {
  const Verdict v = inspect(item);
  return v == Verdict::Ok || v == Verdict::Consistency;
}

FilterResult filter_items(std::span<const CurationItem> items, bool dedup) {
  FilterResult out;
  std::unordered_set<std::string> seen;
  for (const CurationItem& item : items) {
    switch (inspect(item)) {
      case Verdict::Format:
        ++out.report.format;
        continue;
      case Verdict::Keyword:
        ++out.report.keyword;
        continue;
      case Verdict::Consistency:
        ++out.report.consistency;
        continue;
      case Verdict::Ok:
        break;
    }
    if (dedup && !seen.insert(item.task.expression()).second) {
      ++out.report.duplicate;
      continue;
    }
    out.kept.push_back(item);
  }
  return out;
}

CurationOutcome curate(std::span<const TaskInstance> pool, const PolicyParams& miner, const CurationConfig& cfg,
                       std::uint64_t seed) {
  CurationOutcome out;
  const InputProjection proj(miner);
  std::vector<CurationItem> raw;
  raw.reserve(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const TaskInstance& task = pool[i];
    if (task.kind == TaskKind::Objective) {
      Rng rng = make_rng(seed, Stream::kMining, i);
      const MiningResult m = classify_objective(task, proj, cfg, rng);
      out.mining.push_back(m);
      raw.push_back(build_item(task, m.label, Heuristic::Performance));
    } else {
      raw.push_back(build_item(task, classify_subjective(task, cfg), Heuristic::Difficulty));
    }
  }
  FilterResult filtered = filter_items(raw, cfg.dedup);
  out.items = std::move(filtered.kept);
  out.report = filtered.report;
  for (const auto& item : out.items) (item.label == ModeLabel::Reasoning ? out.reasoning : out.direct)++;
  return out;
}

std::string item_record(const CurationItem& item) {
  nlohmann::json j;
  j["expr"] = item.task.expression();
  j["answer"] = item.task.answer;
  j["steps"] = item.task.steps;
  j["kind"] = to_string(item.task.kind);
  j["label"] = to_string(item.label);
  j["target"] = render_tokens(item.response);
  j["source"] = to_string(item.source);
  return j.dump();
}

CurationItem parse_item_record(std::string_view line) {
  try {
    const nlohmann::json j = nlohmann::json::parse(line);
    CurationItem item;
    item.task = parse_task_record(line);
    item.label = parse_mode_label(j.at("label").get<std::string>());
    item.response = parse_tokens(j.at("target").get<std::string>());
    item.source = parse_heuristic(j.at("source").get<std::string>());
    return item;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("bad corpus record: ") + e.what());
  } catch (const ContractViolation& e) {
    throw IoError(std::string("bad corpus record: ") + e.what());
  }
}

void save_corpus(const std::string& path, std::span<const CurationItem> items) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  for (const auto& item : items) out << item_record(item) << '\n';
}

std::vector<CurationItem> load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  std::vector<CurationItem> items;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) items.push_back(parse_item_record(line));
  return items;
}

}  // namespace bpo
