#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "bpo/anneal/curation.hpp"
#include "bpo/optim/adam.hpp"
#include "bpo/policy/policy.hpp"

namespace bpo {

struct SftConfig {
  int epochs = 40;
  double lr = 3e-3;
  int batch_size = 32;
  std::uint64_t shuffle_seed = 0;

  void validate() const;
};

// Prompt `<bos> query <sep>` followed by the item's response.
TokenSeq sft_sequence(const CurationItem& item);
std::size_t sft_prompt_len(const CurationItem& item);

// Mean cross-entropy over every response token of every item; prompt
// positions are conditioning only. Fills the loss gradient when asked.
double sft_loss(const PolicyParams& params, std::span<const CurationItem> items, GradientVector* grad = nullptr);

struct SftResult {
  PolicyParams params;
  std::vector<double> epoch_losses;  // token-weighted running training loss
  std::vector<std::string> warnings;
};

using EpochCallback = std::function<void(int epoch, double loss)>;

// Single mixed stage over Reasoning and Direct items with mini-batch Adam.
SftResult sft_train(const PolicyParams& init, std::span<const CurationItem> items, const SftConfig& cfg,
                    const EpochCallback& on_epoch = {});

}  // namespace bpo
