#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bpo/env/vocab.hpp"
#include "bpo/rng.hpp"

namespace bpo {

enum class TaskKind { Objective, Subjective };

std::string_view to_string(TaskKind kind);
TaskKind parse_task_kind(std::string_view text);

// Distribution over left-to-right modular arithmetic chains.
struct TaskSpec {
  int min_steps = 1;
  int max_steps = 6;
  int easy_threshold = 1;  // steps <= easy_threshold is the easy stratum
  int modulus = 10;
  double subjective_fraction = 0.3;

  void validate() const;
};

// One query such as `2*3+4*2`, evaluated left to right modulo 10.
struct TaskInstance {
  TokenSeq query;
  TokenId answer = 0;
  int steps = 0;
  TaskKind kind = TaskKind::Objective;

  std::string expression() const;
  bool operator==(const TaskInstance&) const = default;
};

struct RewardSignal {
  double value = 0.0;
  bool format_ok = false;
  bool answer_ok = false;
};

// Whether the prompt handed to the generator already closed the think span.
enum class PrefixFraming { Open, Closed };

TaskInstance sample_task(Rng& rng, const TaskSpec& spec);
TaskInstance sample_task_with_steps(Rng& rng, int steps, TaskKind kind);

// Parses `4+9`, `2*3+4*2`, ... and fills answer and steps.
TaskInstance make_task(std::string_view expression, TaskKind kind = TaskKind::Objective);

// Left-to-right fold of a `d (op d)*` token sequence modulo 10.
TokenId evaluate_chain(std::span<const TokenId> query);

// Running partial results, one digit per binary operation.
TokenSeq teacher_trace(const TaskInstance& task);

// Rule based verifier. `generated` is everything after the prompt. Never
// throws; malformed output yields value 0 with format_ok false.
RewardSignal verify_answer(const TaskInstance& task, std::span<const TokenId> generated,
                           PrefixFraming framing);

// One task per line: {"expr": "...", "answer": d, "steps": n, "kind": "..."}.
std::string task_record(const TaskInstance& task);
TaskInstance parse_task_record(std::string_view line);
void save_tasks(const std::string& path, std::span<const TaskInstance> tasks);
std::vector<TaskInstance> load_tasks(const std::string& path);

}  // namespace bpo
