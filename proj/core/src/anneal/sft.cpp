#include "bpo/anneal/sft.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "bpo/error.hpp"

namespace bpo {

void SftConfig::validate() const {
  if (epochs < 0) throw ConfigError("sft.epochs must be >= 0");
  if (!(lr > 0.0)) throw ConfigError("sft.lr must be > 0");
  if (batch_size < 1) throw ConfigError("sft.batch_size must be >= 1");
}

TokenSeq sft_sequence(const CurationItem& item) {
  TokenSeq seq;
  seq.reserve(item.task.query.size() + item.response.size() + 2);
  seq.push_back(tok::kBos);
  seq.insert(seq.end(), item.task.query.begin(), item.task.query.end());
  seq.push_back(tok::kSep);
  seq.insert(seq.end(), item.response.begin(), item.response.end());
  return seq;
}

std::size_t sft_prompt_len(const CurationItem& item) { return item.task.query.size() + 2; }

namespace {

// Summed negative log-likelihood; grad += logp_weight * sum of d log p.
double batch_nll(const PolicyParams& params, std::span<const CurationItem> items,
                 std::span<const std::size_t> order, GradientVector* grad, double logp_weight,
                 std::size_t& tokens) {
  const PolicyDims& dims = params.dims();
  std::vector<double> dz(static_cast<std::size_t>(dims.vocab));
  const InputProjection proj(params);
  std::optional<GradAccumulator> acc;
  if (grad) acc.emplace(params, *grad);
  double nll = 0.0;
  for (std::size_t idx : order) {
    const CurationItem& item = items[idx];
    const TokenSeq seq = sft_sequence(item);
    for (std::size_t t = sft_prompt_len(item); t < seq.size(); ++t) {
      const StepActivations act = proj.forward_at(seq, t);
      nll -= masked_token_logprob(act.logits, seq[t], nullptr);
      ++tokens;
      if (grad) {
        std::fill(dz.begin(), dz.end(), 0.0);
        add_masked_token_dlogits(act.logits, seq[t], nullptr, logp_weight, dz);
        acc->backward(act, dz);
      }
    }
  }
  if (acc) acc->flush();
  return nll;
}

std::size_t count_targets(std::span<const CurationItem> items, std::span<const std::size_t> order) {
  std::size_t n = 0;
  for (std::size_t i : order) n += items[i].response.size();
  return n;
}

}  // namespace

double sft_loss(const PolicyParams& params, std::span<const CurationItem> items, GradientVector* grad) {
  if (items.empty()) throw ContractViolation("sft_loss needs at least one item");
  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t n = count_targets(items, order);
  if (grad && grad->size() != params.size()) *grad = GradientVector(params.size());
  std::size_t tokens = 0;
  const double nll = batch_nll(params, items, order, grad, -1.0 / static_cast<double>(n), tokens);
  return nll / static_cast<double>(tokens);
}

SftResult sft_train(const PolicyParams& init, std::span<const CurationItem> items, const SftConfig& cfg,
                    const EpochCallback& on_epoch) {
  cfg.validate();
  SftResult result{init, {}, {}};
  if (cfg.epochs == 0) return result;
  if (items.empty()) throw ContractViolation("sft_train needs a non-empty corpus");

  const bool has_reasoning = std::any_of(items.begin(), items.end(),
                                         [](const auto& i) { return i.label == ModeLabel::Reasoning; });
  const bool has_direct =
      std::any_of(items.begin(), items.end(), [](const auto& i) { return i.label == ModeLabel::Direct; });
  if (!has_reasoning || !has_direct)
    result.warnings.emplace_back("sft corpus holds only one response format; the policy will not be bi-capable");

  PolicyParams& params = result.params;
  AdamState adam(params.size());
  const AdamHyper hyper{cfg.lr};
  Rng rng = make_rng(cfg.shuffle_seed, Stream::kSftShuffle);
  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto bs = static_cast<std::size_t>(cfg.batch_size);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_nll = 0.0;
    std::size_t epoch_tokens = 0;
    for (std::size_t start = 0; start < order.size(); start += bs) {
      const std::span<const std::size_t> batch(order.data() + start, std::min(bs, order.size() - start));
      GradientVector grad(params.size());
      std::size_t tokens = 0;
      // Ascent direction of -loss.
      const double nll =
          batch_nll(params, items, batch, &grad, 1.0 / static_cast<double>(count_targets(items, batch)), tokens);
      if (!std::isfinite(nll))
        throw NonFiniteError("sft loss became non-finite in epoch " + std::to_string(epoch));
      epoch_nll += nll;
      epoch_tokens += tokens;
      try {
        adam_update(params, grad, adam, hyper);
      } catch (const NonFiniteError& e) {
        throw NonFiniteError("sft epoch " + std::to_string(epoch) + ": " + e.what());
      }
    }
    const double loss = epoch_nll / static_cast<double>(epoch_tokens);
    result.epoch_losses.push_back(loss);
    if (on_epoch) on_epoch(epoch, loss);
  }
  return result;
}

}  // namespace bpo
