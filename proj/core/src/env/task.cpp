#include "bpo/env/task.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "bpo/error.hpp"

namespace bpo {

std::string_view to_string(TaskKind kind) {
  return kind == TaskKind::Objective ? "objective" : "subjective";
}

TaskKind parse_task_kind(std::string_view text) {
  if (text == "objective") return TaskKind::Objective;
  if (text == "subjective") return TaskKind::Subjective;
  throw ContractViolation("unknown task kind '" + std::string(text) + "'");
}

void TaskSpec::validate() const {
  if (min_steps < 1 || min_steps > max_steps)
    throw ConfigError("task spec requires 1 <= min_steps <= max_steps");
  if (easy_threshold < min_steps || easy_threshold > max_steps)
    throw ConfigError("task spec requires easy_threshold in [min_steps, max_steps]");
  if (modulus != 10) throw ConfigError("task spec modulus must be 10 (single-token answers)");
  if (!(subjective_fraction >= 0.0 && subjective_fraction <= 1.0))
    throw ConfigError("task spec subjective_fraction must lie in [0, 1]");
}

std::string TaskInstance::expression() const {
  std::string out;
  for (TokenId t : query) {
    if (tok::is_digit(t))
      out += static_cast<char>('0' + t);
    else if (t == tok::kPlus)
      out += '+';
    else if (t == tok::kTimes)
      out += '*';
    else
      throw ContractViolation("query holds a non-expression token");
  }
  return out;
}

TokenId evaluate_chain(std::span<const TokenId> query) {
  if (query.empty() || query.size() % 2 == 0 || !tok::is_digit(query[0]))
    throw ContractViolation("malformed arithmetic chain");
  int acc = query[0];
  for (std::size_t i = 1; i + 1 < query.size(); i += 2) {
    const TokenId op = query[i];
    const TokenId operand = query[i + 1];
    if (!tok::is_digit(operand)) throw ContractViolation("malformed arithmetic chain");
    if (op == tok::kPlus)
      acc = (acc + operand) % 10;
    else if (op == tok::kTimes)
      acc = (acc * operand) % 10;
    else
      throw ContractViolation("malformed arithmetic chain");
  }
  return static_cast<TokenId>(acc);
}

TaskInstance sample_task_with_steps(Rng& rng, int steps, TaskKind kind) {
  TaskInstance task;
  task.steps = steps;
  task.kind = kind;
  task.query.reserve(static_cast<std::size_t>(2 * steps + 1));
  task.query.push_back(uniform_int(rng, 0, 9));
  for (int s = 0; s < steps; ++s) {
    task.query.push_back(uniform_int(rng, 0, 1) == 0 ? tok::kPlus : tok::kTimes);
    task.query.push_back(uniform_int(rng, 0, 9));
  }
  task.answer = evaluate_chain(task.query);
  return task;
}

TaskInstance sample_task(Rng& rng, const TaskSpec& spec) {
  const int steps = uniform_int(rng, spec.min_steps, spec.max_steps);
  const bool subjective = uniform01(rng) < spec.subjective_fraction;
  return sample_task_with_steps(rng, steps, subjective ? TaskKind::Subjective : TaskKind::Objective);
}

TaskInstance make_task(std::string_view expression, TaskKind kind) {
  TaskInstance task;
  task.kind = kind;
  for (char c : expression) {
    if (c == ' ') continue;
    if (c >= '0' && c <= '9')
      task.query.push_back(c - '0');
    else if (c == '+')
      task.query.push_back(tok::kPlus);
    else if (c == '*')
      task.query.push_back(tok::kTimes);
    else
      throw ContractViolation("bad character in expression '" + std::string(expression) + "'");
  }
  task.answer = evaluate_chain(task.query);
  task.steps = static_cast<int>(task.query.size() / 2);
  return task;
}

TokenSeq teacher_trace(const TaskInstance& task) {
  TokenSeq trace;
  trace.reserve(static_cast<std::size_t>(task.steps));
  int acc = task.query.at(0);
  for (std::size_t i = 1; i + 1 < task.query.size(); i += 2) {
    const int operand = task.query[i + 1];
    acc = task.query[i] == tok::kPlus ? (acc + operand) % 10 : (acc * operand) % 10;
    trace.push_back(acc);
  }
  return trace;
}

RewardSignal verify_answer(const TaskInstance& task, std::span<const TokenId> generated,
                           PrefixFraming framing) {
  RewardSignal r;
  // Grammar: body* </think> digit <eos> when the prefix left the span open,
  // digit <eos> when the prefix already closed it.
  std::size_t pos = 0;
  if (framing == PrefixFraming::Open) {
    while (pos < generated.size() && (tok::is_digit(generated[pos]) || tok::is_operator(generated[pos])))
      ++pos;
    if (pos >= generated.size() || generated[pos] != tok::kThinkClose) return r;
    ++pos;
  }
  if (generated.size() != pos + 2) return r;
  if (!tok::is_digit(generated[pos]) || generated[pos + 1] != tok::kEos) return r;
  r.format_ok = true;
  r.answer_ok = generated[pos] == task.answer;
  r.value = r.answer_ok ? 1.0 : 0.0;
  return r;
}

std::string task_record(const TaskInstance& task) {
  nlohmann::json j;
  j["expr"] = task.expression();
  j["answer"] = task.answer;
  j["steps"] = task.steps;
  j["kind"] = to_string(task.kind);
  return j.dump();
}

TaskInstance parse_task_record(std::string_view line) {
  TaskInstance task;
  int answer = 0;
  int steps = 0;
  try {
    const nlohmann::json j = nlohmann::json::parse(line);
    task = make_task(j.at("expr").get<std::string>(), parse_task_kind(j.at("kind").get<std::string>()));
    answer = j.at("answer").get<int>();
    steps = j.at("steps").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("bad task record: ") + e.what());
  } catch (const ContractViolation& e) {
    throw IoError(std::string("bad task record: ") + e.what());
  }
  if (answer != task.answer || steps != task.steps)
    throw IoError("task record answer/steps disagree with its expression: " + std::string(line));
  return task;
}

void save_tasks(const std::string& path, std::span<const TaskInstance> tasks) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  for (const auto& t : tasks) out << task_record(t) << '\n';
}

std::vector<TaskInstance> load_tasks(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  std::vector<TaskInstance> tasks;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) tasks.push_back(parse_task_record(line));
  return tasks;
}

}  // namespace bpo
