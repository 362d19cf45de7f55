#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "bpo/env/vocab.hpp"
#include "bpo/rng.hpp"

namespace bpo {

// Windowed-concatenation MLP language model:
//   embed each of the last W tokens -> concat (W*d) -> tanh(affine) (h) -> affine (V).
struct PolicyDims {
  int vocab = tok::kVocabSize;
  int window = 16;
  int embed = 24;
  int hidden = 64;

  std::size_t param_count() const;
  // Contexts shorter than the window are left-padded with the last id.
  TokenId pad() const { return vocab - 1; }
  void validate() const;
  bool operator==(const PolicyDims&) const = default;
};

// Offsets of each tensor inside the canonical flat parameter vector.
struct ParamLayout {
  std::size_t embedding = 0;  // V x d, row per token
  std::size_t hidden_w = 0;   // (W*d) x h, row-major
  std::size_t hidden_b = 0;   // h
  std::size_t out_w = 0;      // h x V, row-major
  std::size_t out_b = 0;      // V
  std::size_t total = 0;

  static ParamLayout of(const PolicyDims& dims);
};

class PolicyParams {
 public:
  explicit PolicyParams(const PolicyDims& dims);

  const PolicyDims& dims() const { return dims_; }
  const ParamLayout& layout() const { return layout_; }
  std::size_t size() const { return values_.size(); }

  std::span<double> flat() { return values_; }
  std::span<const double> flat() const { return values_; }

  bool all_finite() const;
  bool operator==(const PolicyParams& other) const {
    return dims_ == other.dims_ && values_ == other.values_;
  }

 private:
  PolicyDims dims_;
  ParamLayout layout_;
  std::vector<double> values_;
};

// Same shape and ordering as PolicyParams::flat().
class GradientVector {
 public:
  GradientVector() = default;
  explicit GradientVector(std::size_t size) : values_(size, 0.0) {}
  explicit GradientVector(const PolicyDims& dims) : values_(dims.param_count(), 0.0) {}

  std::size_t size() const { return values_.size(); }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  GradientVector& operator+=(const GradientVector& other);
  GradientVector& operator*=(double scale);
  bool all_finite() const;
  double max_abs() const;

 private:
  std::vector<double> values_;
};

// Tokens excluded from the softmax support at one step.
struct TokenMask {
  std::vector<TokenId> banned;

  bool allows(TokenId t) const;
  bool empty() const { return banned.empty(); }
  bool operator==(const TokenMask&) const = default;
};

// Masks applied while sampling, keyed by absolute token position, so that
// scoring can renormalize over exactly the same support.
struct MaskSpec {
  struct Entry {
    std::size_t position = 0;
    TokenMask mask;
    bool operator==(const Entry&) const = default;
  };
  std::vector<Entry> entries;

  const TokenMask* at(std::size_t position) const;
  bool operator==(const MaskSpec&) const = default;
};

// A set of next-token outcomes, used to score a mode choice as one event.
struct TokenSet {
  std::vector<TokenId> ids;
  bool complement = false;  // true: every id not listed

  bool contains(TokenId t) const;
  static TokenSet only(std::vector<TokenId> ids) { return {std::move(ids), false}; }
  static TokenSet all_but(std::vector<TokenId> ids) { return {std::move(ids), true}; }
};

PolicyParams init_params(std::uint64_t seed, const PolicyDims& dims);

// The W tokens preceding `position`, left-padded.
TokenSeq context_at(std::span<const TokenId> tokens, std::size_t position, const PolicyDims& dims);

std::vector<double> logits(const PolicyParams& params, std::span<const TokenId> context);

// log p(tokens[t] | tokens[<t]) for every t >= prompt_len, under the masked softmax.
std::vector<double> logprob_sequence(const PolicyParams& params, std::span<const TokenId> tokens,
                                     std::size_t prompt_len, const MaskSpec& masks);

// Single-position variant of logprob_sequence; the two share one code path.
double token_logprob(const PolicyParams& params, std::span<const TokenId> tokens, std::size_t position,
                     const TokenMask* mask);

// log P(next token at `position` falls in `outcomes`), unmasked softmax.
double event_logprob(const PolicyParams& params, std::span<const TokenId> tokens, std::size_t position,
                     const TokenSet& outcomes);

// Temperature 0 is argmax with ties broken towards the lowest id.
TokenId sample_from_logits(std::span<const double> logits, double temperature, const TokenMask* mask,
                           Rng& rng);
TokenId sample_next(const PolicyParams& params, std::span<const TokenId> context, double temperature,
                    const TokenMask* mask, Rng& rng);

// grad += sum_t weights[t - prompt_len] * d/dtheta log p(tokens[t] | ...).
void accumulate_weighted_grad(const PolicyParams& params, std::span<const TokenId> tokens,
                              std::size_t prompt_len, const MaskSpec& masks,
                              std::span<const double> weights, GradientVector& grad);
GradientVector weighted_logprob_grad(const PolicyParams& params, std::span<const TokenId> tokens,
                                     std::size_t prompt_len, const MaskSpec& masks,
                                     std::span<const double> weights);

void accumulate_event_grad(const PolicyParams& params, std::span<const TokenId> tokens, std::size_t position,
                           const TokenSet& outcomes, double weight, GradientVector& grad);

// Low-level forward/backward for one prediction step. Objectives that need
// log-probs and gradients of the same positions use these to avoid a second
// forward pass.
struct StepActivations {
  TokenSeq context;
  std::vector<double> hidden;  // tanh outputs
  std::vector<double> logits;
};

StepActivations forward_step(const PolicyParams& params, std::span<const TokenId> context);
void backward_step(const PolicyParams& params, const StepActivations& act, std::span<const double> dlogits,
                   GradientVector& grad);

// Hidden pre-activation contribution E[token] * W1[slot] for every (slot,
// token) pair, so a forward step costs W*h instead of W*d*h. Holds a
// reference to `params`, which must outlive it and stay unchanged.
class InputProjection {
 public:
  explicit InputProjection(const PolicyParams& params);

  const PolicyParams& params() const { return *params_; }
  StepActivations forward(std::span<const TokenId> context) const;
  // forward(context_at(tokens, position)).
  StepActivations forward_at(std::span<const TokenId> tokens, std::size_t position) const;

 private:
  const PolicyParams* params_;
  std::vector<double> table_;  // (slot * V + token) * h + j
};

// backward_step with the embedding and hidden-weight terms deferred: hidden
// deltas are summed per (slot, token) and expanded once by flush(). The
// result equals a sequence of backward_step calls up to summation order.
class GradAccumulator {
 public:
  GradAccumulator(const PolicyParams& params, GradientVector& grad);
  ~GradAccumulator();
  GradAccumulator(const GradAccumulator&) = delete;
  GradAccumulator& operator=(const GradAccumulator&) = delete;

  void backward(const StepActivations& act, std::span<const double> dlogits);
  void flush();

 private:
  const PolicyParams* params_;
  GradientVector* grad_;
  std::vector<double> pending_;  // (slot * V + token) * h + j
  std::vector<char> touched_;    // slot * V + token
  std::vector<double> dpre_;
  bool dirty_ = false;
};

// log P(outcome) - log P(support) over softmax(logits); `dlogits += weight * d/dlogits`.
double masked_token_logprob(std::span<const double> logits, TokenId token, const TokenMask* mask);
void add_masked_token_dlogits(std::span<const double> logits, TokenId token, const TokenMask* mask,
                              double weight, std::span<double> dlogits);
double event_logprob_from_logits(std::span<const double> logits, const TokenSet& outcomes);
void add_event_dlogits(std::span<const double> logits, const TokenSet& outcomes, double weight,
                       std::span<double> dlogits);

}  // namespace bpo
