#include "bpo/harness/evaluate.hpp"

#include <algorithm>

#include "bpo/error.hpp"

namespace bpo {

EvalSuite EvalSuite::prefix(std::size_t n_easy, std::size_t n_hard) const {
  EvalSuite out;
  out.easy.assign(easy.begin(), easy.begin() + static_cast<std::ptrdiff_t>(std::min(n_easy, easy.size())));
  out.hard.assign(hard.begin(), hard.begin() + static_cast<std::ptrdiff_t>(std::min(n_hard, hard.size())));
  return out;
}

namespace {

struct Accum {
  std::size_t count = 0;
  std::size_t correct = 0;
  std::size_t thinking = 0;
  double tokens = 0.0;
  double body = 0.0;

  void add(const Rollout& r) {
    ++count;
    if (r.reward == 1.0) ++correct;
    if (r.realized == Mode::Thinking) {
      ++thinking;
      body += static_cast<double>(r.think_body_len());
    }
    tokens += static_cast<double>(r.generated().size());
  }

  StratumEval finish(Mode mode) const {
    StratumEval s;
    s.count = count;
    if (count == 0) return s;
    const double n = static_cast<double>(count);
    s.accuracy = static_cast<double>(correct) / n;
    s.mean_tokens = tokens / n;
    s.mean_think_body = body / n;
    if (mode == Mode::Auto) s.trigger_rate = static_cast<double>(thinking) / n;
    return s;
  }
};

}  // namespace

EvalResult evaluate(const PolicyParams& params, const EvalSuite& suite, Mode mode, std::size_t max_gen_len) {
  if (suite.size() == 0) throw ContractViolation("evaluation suite is empty");
  GenConfig gen{0.0, max_gen_len};
  Rng unused = make_rng(0, Stream::kTest);
  const InputProjection proj(params);
  Accum all, easy, hard;
  for (const auto& t : suite.easy) {
    const Rollout r = generate_rollout(proj, t, mode, gen, unused);
    all.add(r);
    easy.add(r);
  }
  for (const auto& t : suite.hard) {
    const Rollout r = generate_rollout(proj, t, mode, gen, unused);
    all.add(r);
    hard.add(r);
  }
  EvalResult res;
  res.mode = mode;
  res.all = all.finish(mode);
  res.easy = easy.finish(mode);
  res.hard = hard.finish(mode);
  return res;
}

}  // namespace bpo
