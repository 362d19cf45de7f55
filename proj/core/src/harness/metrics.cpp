#include "bpo/harness/metrics.hpp"

#include <fstream>

#include "bpo/error.hpp"

namespace bpo {

ProbeMetrics ProbeMetrics::from(const EvalResult& think, const EvalResult& nothink, const EvalResult& autom) {
  ProbeMetrics p;
  p.trigger_rate = autom.all.trigger_rate.value_or(0.0);
  p.trigger_rate_easy = autom.easy.trigger_rate.value_or(0.0);
  p.trigger_rate_hard = autom.hard.trigger_rate.value_or(0.0);
  p.acc_think = think.all.accuracy;
  p.acc_nothink = nothink.all.accuracy;
  p.acc_auto = autom.all.accuracy;
  p.acc_think_easy = think.easy.accuracy;
  p.acc_think_hard = think.hard.accuracy;
  p.acc_nothink_easy = nothink.easy.accuracy;
  p.acc_nothink_hard = nothink.hard.accuracy;
  p.acc_auto_easy = autom.easy.accuracy;
  p.acc_auto_hard = autom.hard.accuracy;
  p.tokens_think_easy = think.easy.mean_tokens;
  p.tokens_think_hard = think.hard.mean_tokens;
  p.tokens_nothink_easy = nothink.easy.mean_tokens;
  p.tokens_nothink_hard = nothink.hard.mean_tokens;
  p.tokens_auto_easy = autom.easy.mean_tokens;
  p.tokens_auto_hard = autom.hard.mean_tokens;
  return p;
}

namespace {

nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::optional<double> optional_from(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

#define BPO_PROBE_FIELDS(X)                                                                                  \
  X(trigger_rate) X(trigger_rate_easy) X(trigger_rate_hard) X(acc_think) X(acc_nothink) X(acc_auto)          \
      X(acc_think_easy) X(acc_think_hard) X(acc_nothink_easy) X(acc_nothink_hard) X(acc_auto_easy)           \
          X(acc_auto_hard) X(tokens_think_easy) X(tokens_think_hard) X(tokens_nothink_easy)                  \
              X(tokens_nothink_hard) X(tokens_auto_easy) X(tokens_auto_hard)

}  // namespace

nlohmann::json to_json(const MetricsRecord& r) {
  nlohmann::json j;
  j["step"] = r.step;
  j["algo"] = r.algo;
  j["objective_total"] = r.objective_total;
  j["objective_surrogate"] = r.objective_surrogate;
  j["objective_kl"] = r.objective_kl;
  j["clip_fraction"] = r.clip_fraction;
  j["reward_think"] = optional_json(r.reward_think);
  j["reward_nothink"] = optional_json(r.reward_nothink);
  j["think_items"] = r.think_items;
  j["nothink_items"] = r.nothink_items;
  j["think_correct_items"] = r.think_correct_items;
  j["nothink_correct_items"] = r.nothink_correct_items;
  j["minority_share"] = r.minority_share;
  j["mean_tokens"] = r.mean_tokens;
  if (r.probe) {
    nlohmann::json p;
#define X(name) p[#name] = r.probe->name;
    BPO_PROBE_FIELDS(X)
#undef X
    j["probe"] = p;
  } else {
    j["probe"] = nullptr;
  }
  return j;
}

MetricsRecord metrics_from_json(const nlohmann::json& j) {
  MetricsRecord r;
  try {
    r.step = j.at("step").get<std::int64_t>();
    r.algo = j.at("algo").get<std::string>();
    r.objective_total = j.at("objective_total").get<double>();
    r.objective_surrogate = j.at("objective_surrogate").get<double>();
    r.objective_kl = j.at("objective_kl").get<double>();
    r.clip_fraction = j.at("clip_fraction").get<double>();
    r.reward_think = optional_from(j, "reward_think");
    r.reward_nothink = optional_from(j, "reward_nothink");
    r.think_items = j.at("think_items").get<double>();
    r.nothink_items = j.at("nothink_items").get<double>();
    r.think_correct_items = j.at("think_correct_items").get<double>();
    r.nothink_correct_items = j.at("nothink_correct_items").get<double>();
    r.minority_share = j.at("minority_share").get<double>();
    r.mean_tokens = j.at("mean_tokens").get<double>();
    if (j.contains("probe") && !j.at("probe").is_null()) {
      const auto& p = j.at("probe");
      ProbeMetrics pm;
#define X(name) pm.name = p.at(#name).get<double>();
      BPO_PROBE_FIELDS(X)
#undef X
      r.probe = pm;
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed metrics record: ") + e.what());
  }
  return r;
}

nlohmann::json to_json(const EvalResult& res) {
  auto stratum = [](const StratumEval& s) {
    nlohmann::json j;
    j["count"] = s.count;
    j["accuracy"] = s.accuracy;
    j["mean_tokens"] = s.mean_tokens;
    j["mean_think_body"] = s.mean_think_body;
    j["trigger_rate"] = optional_json(s.trigger_rate);
    return j;
  };
  nlohmann::json j;
  j["mode"] = to_string(res.mode);
  j["all"] = stratum(res.all);
  j["easy"] = stratum(res.easy);
  j["hard"] = stratum(res.hard);
  return j;
}

std::vector<MetricsRecord> load_metrics(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("missing metrics stream: " + path);
  std::vector<MetricsRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      out.push_back(metrics_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::parse_error& e) {
      throw IoError(std::string("malformed metrics line: ") + e.what());
    }
  }
  return out;
}

}  // namespace bpo
