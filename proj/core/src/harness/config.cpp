#include "bpo/harness/config.hpp"

#include <fstream>
#include <set>

#include "bpo/error.hpp"

namespace bpo {

void EvalConfig::validate(const TaskSpec& spec) const {
  if (easy < 0 || hard < 0 || probe_easy < 0 || probe_hard < 0) throw ConfigError("eval sizes must be >= 0");
  if (probe_easy > easy || probe_hard > hard) throw ConfigError("probe sizes must not exceed eval sizes");
  if (hard_min_steps <= spec.easy_threshold || hard_min_steps > spec.max_steps)
    throw ConfigError("eval.hard_min_steps must lie in (easy_threshold, max_steps]");
}

void RunConfig::validate() const {
  task.validate();
  policy.validate();
  if (policy.vocab != tok::kVocabSize)
    throw ConfigError("policy.vocab must equal the task vocabulary size " + std::to_string(tok::kVocabSize));
  curation.validate(task);
  if (pool_size < 1) throw ConfigError("curation.pool_size must be >= 1");
  if (miner_warmup_epochs < 0) throw ConfigError("curation.miner_warmup_epochs must be >= 0");
  sft.validate();
  rl.validate();
  generation.validate();
  eval.validate(task);
}

namespace {

// Reads known keys from one JSON object and rejects the rest.
class Section {
 public:
  Section(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError("config section '" + path_ + "' must be an object");
  }

  template <typename T>
  void read(const char* key, T& out) {
    used_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError("config key '" + path_ + key + "' has the wrong type");
    }
  }

  template <typename Parse, typename T>
  void read_enum(const char* key, T& out, Parse parse) {
    std::string text;
    read(key, text);
    if (!text.empty()) out = parse(text);
  }

  bool has(const char* key) {
    used_.insert(key);
    return j_.contains(key);
  }
  Section sub(const char* key) { return Section(j_.at(key), path_ + key + "."); }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!used_.contains(k)) throw ConfigError("unknown config key '" + path_ + k + "'");
  }

 private:
  const nlohmann::json& j_;
  std::string path_;
  std::set<std::string> used_;
};

}  // namespace

RunConfig parse_config(const nlohmann::json& doc) {
  RunConfig c;
  Section root(doc, "");
  root.read("seed", c.seed);
  root.read("output_dir", c.output_dir);
  root.read_enum("algo", c.algo, parse_algo);
  if (root.has("task")) {
    Section s = root.sub("task");
    s.read("min_steps", c.task.min_steps);
    s.read("max_steps", c.task.max_steps);
    s.read("easy_threshold", c.task.easy_threshold);
    s.read("modulus", c.task.modulus);
    s.read("subjective_fraction", c.task.subjective_fraction);
    s.finish();
  }
  if (root.has("policy")) {
    Section s = root.sub("policy");
    s.read("vocab", c.policy.vocab);
    s.read("window", c.policy.window);
    s.read("embed", c.policy.embed);
    s.read("hidden", c.policy.hidden);
    s.finish();
  }
  if (root.has("curation")) {
    Section s = root.sub("curation");
    s.read("samples", c.curation.samples);
    s.read("mining_temperature", c.curation.mining_temperature);
    s.read_enum("direct_rule", c.curation.direct_rule, parse_direct_rule);
    s.read("difficulty_threshold", c.curation.difficulty_threshold);
    s.read("dedup", c.curation.dedup);
    s.read("pool_size", c.pool_size);
    s.read("miner_warmup_epochs", c.miner_warmup_epochs);
    s.finish();
  }
  if (root.has("sft")) {
    Section s = root.sub("sft");
    s.read("epochs", c.sft.epochs);
    s.read("lr", c.sft.lr);
    s.read("batch_size", c.sft.batch_size);
    s.read("shuffle_seed", c.sft.shuffle_seed);
    s.finish();
  }
  if (root.has("rl")) {
    Section s = root.sub("rl");
    s.read("g", c.rl.g);
    s.read("epsilon", c.rl.epsilon);
    s.read("beta", c.rl.beta);
    s.read("eps_std", c.rl.eps_std);
    s.read("lr", c.rl.adam.lr);
    s.read("adam_beta1", c.rl.adam.beta1);
    s.read("adam_beta2", c.rl.adam.beta2);
    s.read("adam_eps", c.rl.adam.eps);
    s.read("inner_epochs", c.rl.inner_epochs);
    s.read("batch_queries", c.rl.batch_queries);
    s.read("iters", c.rl.iters);
    s.read_enum("advantage_scope", c.rl.advantage_scope, parse_advantage_scope);
    s.read("credit_mode_choice", c.rl.credit_mode_choice);
    s.read("probe_every", c.rl.probe_every);
    s.finish();
  }
  if (root.has("generation")) {
    Section s = root.sub("generation");
    s.read("temperature", c.generation.temperature);
    s.read("max_gen_len", c.generation.max_gen_len);
    s.finish();
  }
  if (root.has("eval")) {
    Section s = root.sub("eval");
    s.read("easy", c.eval.easy);
    s.read("hard", c.eval.hard);
    s.read("hard_min_steps", c.eval.hard_min_steps);
    s.read("probe_easy", c.eval.probe_easy);
    s.read("probe_hard", c.eval.probe_hard);
    s.finish();
  }
  root.finish();
  c.curation.max_gen_len = c.generation.max_gen_len;
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config " + path + " is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j;
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  j["algo"] = to_string(c.algo);
  j["task"] = {{"min_steps", c.task.min_steps},
               {"max_steps", c.task.max_steps},
               {"easy_threshold", c.task.easy_threshold},
               {"modulus", c.task.modulus},
               {"subjective_fraction", c.task.subjective_fraction}};
  j["policy"] = {{"vocab", c.policy.vocab},
                 {"window", c.policy.window},
                 {"embed", c.policy.embed},
                 {"hidden", c.policy.hidden}};
  j["curation"] = {{"samples", c.curation.samples},
                   {"mining_temperature", c.curation.mining_temperature},
                   {"direct_rule", to_string(c.curation.direct_rule)},
                   {"difficulty_threshold", c.curation.difficulty_threshold},
                   {"dedup", c.curation.dedup},
                   {"pool_size", c.pool_size},
                   {"miner_warmup_epochs", c.miner_warmup_epochs}};
  j["sft"] = {{"epochs", c.sft.epochs},
              {"lr", c.sft.lr},
              {"batch_size", c.sft.batch_size},
              {"shuffle_seed", c.sft.shuffle_seed}};
  j["rl"] = {{"g", c.rl.g},
             {"epsilon", c.rl.epsilon},
             {"beta", c.rl.beta},
             {"eps_std", c.rl.eps_std},
             {"lr", c.rl.adam.lr},
             {"adam_beta1", c.rl.adam.beta1},
             {"adam_beta2", c.rl.adam.beta2},
             {"adam_eps", c.rl.adam.eps},
             {"inner_epochs", c.rl.inner_epochs},
             {"batch_queries", c.rl.batch_queries},
             {"iters", c.rl.iters},
             {"advantage_scope", to_string(c.rl.advantage_scope)},
             {"credit_mode_choice", c.rl.credit_mode_choice},
             {"probe_every", c.rl.probe_every}};
  j["generation"] = {{"temperature", c.generation.temperature}, {"max_gen_len", c.generation.max_gen_len}};
  j["eval"] = {{"easy", c.eval.easy},
               {"hard", c.eval.hard},
               {"hard_min_steps", c.eval.hard_min_steps},
               {"probe_easy", c.eval.probe_easy},
               {"probe_hard", c.eval.probe_hard}};
  return j;
}

}  // namespace bpo
