#include "bpo/policy/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "bpo/error.hpp"

namespace bpo {

std::size_t PolicyDims::param_count() const { return ParamLayout::of(*this).total; }

void PolicyDims::validate() const {
  if (vocab < 1 || window < 1 || embed < 1 || hidden < 1)
    throw ConfigError("policy dims must all be >= 1");
}

ParamLayout ParamLayout::of(const PolicyDims& dims) {
  const auto V = static_cast<std::size_t>(dims.vocab);
  const auto W = static_cast<std::size_t>(dims.window);
  const auto d = static_cast<std::size_t>(dims.embed);
  const auto h = static_cast<std::size_t>(dims.hidden);
  ParamLayout l;
  l.embedding = 0;
  l.hidden_w = l.embedding + V * d;
  l.hidden_b = l.hidden_w + W * d * h;
  l.out_w = l.hidden_b + h;
  l.out_b = l.out_w + h * V;
  l.total = l.out_b + V;
  return l;
}

PolicyParams::PolicyParams(const PolicyDims& dims)
    : dims_(dims), layout_(ParamLayout::of(dims)), values_(layout_.total, 0.0) {
  dims.validate();
}

bool PolicyParams::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double x) { return std::isfinite(x); });
}

GradientVector& GradientVector::operator+=(const GradientVector& other) {
  if (other.size() != size()) throw ContractViolation("gradient size mismatch");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

GradientVector& GradientVector::operator*=(double scale) {
  for (double& x : values_) x *= scale;
  return *this;
}

bool GradientVector::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double x) { return std::isfinite(x); });
}

double GradientVector::max_abs() const {
  double m = 0.0;
  for (double x : values_) m = std::max(m, std::abs(x));
  return m;
}

bool TokenMask::allows(TokenId t) const {
  return std::find(banned.begin(), banned.end(), t) == banned.end();
}

const TokenMask* MaskSpec::at(std::size_t position) const {
  for (const auto& e : entries)
    if (e.position == position) return &e.mask;
  return nullptr;
}

bool TokenSet::contains(TokenId t) const {
  const bool listed = std::find(ids.begin(), ids.end(), t) != ids.end();
  return complement ? !listed : listed;
}

PolicyParams init_params(std::uint64_t seed, const PolicyDims& dims) {
  PolicyParams params(dims);
  Rng rng = make_rng(seed, Stream::kInit);
  std::uniform_real_distribution<double> dist(-0.08, 0.08);
  for (double& x : params.flat()) x = dist(rng);
  return params;
}

TokenSeq context_at(std::span<const TokenId> tokens, std::size_t position, const PolicyDims& dims) {
  const auto W = static_cast<std::size_t>(dims.window);
  TokenSeq ctx(W, dims.pad());
  const std::size_t avail = std::min(position, W);
  for (std::size_t i = 0; i < avail; ++i) ctx[W - avail + i] = tokens[position - avail + i];
  return ctx;
}

StepActivations forward_step(const PolicyParams& params, std::span<const TokenId> context) {
  const PolicyDims& dims = params.dims();
  const auto V = static_cast<std::size_t>(dims.vocab);
  const auto W = static_cast<std::size_t>(dims.window);
  const auto d = static_cast<std::size_t>(dims.embed);
  const auto h = static_cast<std::size_t>(dims.hidden);
  if (context.size() != W)
    throw ContractViolation("context length " + std::to_string(context.size()) + " != window " +
                            std::to_string(W));
  const ParamLayout& L = params.layout();
  const double* theta = params.flat().data();

  StepActivations act;
  act.context.assign(context.begin(), context.end());
  std::vector<double> pre(theta + L.hidden_b, theta + L.hidden_b + h);
  for (std::size_t slot = 0; slot < W; ++slot) {
    const TokenId t = context[slot];
    if (t < 0 || static_cast<std::size_t>(t) >= V)
      throw ContractViolation("token id " + std::to_string(t) + " >= vocab size " + std::to_string(V));
    const double* emb = theta + L.embedding + static_cast<std::size_t>(t) * d;
    for (std::size_t k = 0; k < d; ++k) {
      const double x = emb[k];
      const double* row = theta + L.hidden_w + (slot * d + k) * h;
      for (std::size_t j = 0; j < h; ++j) pre[j] += x * row[j];
    }
  }
  act.hidden.resize(h);
  for (std::size_t j = 0; j < h; ++j) act.hidden[j] = std::tanh(pre[j]);

  act.logits.assign(theta + L.out_b, theta + L.out_b + V);
  for (std::size_t j = 0; j < h; ++j) {
    const double a = act.hidden[j];
    const double* row = theta + L.out_w + j * V;
    for (std::size_t v = 0; v < V; ++v) act.logits[v] += a * row[v];
  }
  return act;
}

void backward_step(const PolicyParams& params, const StepActivations& act, std::span<const double> dlogits,
                   GradientVector& grad) {
  const PolicyDims& dims = params.dims();
  const auto V = static_cast<std::size_t>(dims.vocab);
  const auto W = static_cast<std::size_t>(dims.window);
  const auto d = static_cast<std::size_t>(dims.embed);
  const auto h = static_cast<std::size_t>(dims.hidden);
  if (dlogits.size() != V || grad.size() != params.size())
    throw ContractViolation("backward_step shape mismatch");
  const ParamLayout& L = params.layout();
  const double* theta = params.flat().data();
  double* g = grad.values().data();

  std::vector<double> dpre(h, 0.0);
  for (std::size_t j = 0; j < h; ++j) {
    const double a = act.hidden[j];
    const double* row = theta + L.out_w + j * V;
    double* grow = g + L.out_w + j * V;
    double acc = 0.0;
    for (std::size_t v = 0; v < V; ++v) {
      grow[v] += a * dlogits[v];
      acc += row[v] * dlogits[v];
    }
    dpre[j] = acc * (1.0 - a * a);
  }
  for (std::size_t v = 0; v < V; ++v) g[L.out_b + v] += dlogits[v];
  for (std::size_t j = 0; j < h; ++j) g[L.hidden_b + j] += dpre[j];

  for (std::size_t slot = 0; slot < W; ++slot) {
    const auto t = static_cast<std::size_t>(act.context[slot]);
    const double* emb = theta + L.embedding + t * d;
    double* gemb = g + L.embedding + t * d;
    for (std::size_t k = 0; k < d; ++k) {
      const double x = emb[k];
      const std::size_t base = (slot * d + k) * h;
      const double* row = theta + L.hidden_w + base;
      double* grow = g + L.hidden_w + base;
      double dx = 0.0;
      for (std::size_t j = 0; j < h; ++j) {
        grow[j] += x * dpre[j];
        dx += row[j] * dpre[j];
      }
      gemb[k] += dx;
    }
  }
}

InputProjection::InputProjection(const PolicyParams& params) : params_(&params) {
  const PolicyDims& dims = params.dims();
  const auto V = static_cast<std::size_t>(dims.vocab);
  const auto W = static_cast<std::size_t>(dims.window);
  const auto d = static_cast<std::size_t>(dims.embed);
  const auto h = static_cast<std::size_t>(dims.hidden);
  const ParamLayout& L = params.layout();
  const double* theta = params.flat().data();
  table_.assign(W * V * h, 0.0);
  for (std::size_t slot = 0; slot < W; ++slot) {
    for (std::size_t t = 0; t < V; ++t) {
      double* out = table_.data() + (slot * V + t) * h;
      const double* emb = theta + L.embedding + t * d;
      for (std::size_t k = 0; k < d; ++k) {
        const double x = emb[k];
        const double* row = theta + L.hidden_w + (slot * d + k) * h;
        for (std::size_t j = 0; j < h; ++j) out[j] += x * row[j];
      }
    }
  }
}

StepActivations InputProjection::forward(std::span<const TokenId> context) const {
  const PolicyDims& dims = params_->dims();
  const auto V = static_cast<std::size_t>(dims.vocab);
  const auto W = static_cast<std::size_t>(dims.window);
  const auto h = static_cast<std::size_t>(dims.hidden);
  if (context.size() != W)
    throw ContractViolation("context length " + std::to_string(context.size()) + " != window " +
                            std::to_string(W));
  const ParamLayout& L = params_->layout();
  const double* theta = params_->flat().data();

  StepActivations act;
  act.context.assign(context.begin(), context.end());
  std::vector<double> pre(theta + L.hidden_b, theta + L.hidden_b + h);
  for (std::size_t slot = 0; slot < W; ++slot) {
    const TokenId t = context[slot];
    if (t < 0 || static_cast<std::size_t>(t) >= V)
      throw ContractViolation("token id " + std::to_string(t) + " >= vocab size " + std::to_string(V));
    const double* row = table_.data() + (slot * V + static_cast<std::size_t>(t)) * h;
    for (std::size_t j = 0; j < h; ++j) pre[j] += row[j];
  }
  act.hidden.resize(h);
  for (std::size_t j = 0; j < h; ++j) act.hidden[j] = std::tanh(pre[j]);

  act.logits.assign(theta + L.out_b, theta + L.out_b + V);
  for (std::size_t j = 0; j < h; ++j) {
    const double a = act.hidden[j];
    const double* row = theta + L.out_w + j * V;
    for (std::size_t v = 0; v < V; ++v) act.logits[v] += a * row[v];
  }
  return act;
}

StepActivations InputProjection::forward_at(std::span<const TokenId> tokens, std::size_t position) const {
  return forward(context_at(tokens, position, params_->dims()));
}

GradAccumulator::GradAccumulator(const PolicyParams& params, GradientVector& grad)
    : params_(&params), grad_(&grad) {
  const PolicyDims& dims = params.dims();
  if (grad.size() != params.size()) throw ContractViolation("gradient size does not match params");
  const auto V = static_cast<std::size_t>(dims.vocab);
  const auto W = static_cast<std::size_t>(dims.window);
  const auto h = static_cast<std::size_t>(dims.hidden);
  pending_.assign(W * V * h, 0.0);
  touched_.assign(W * V, 0);
  dpre_.resize(h);
}

GradAccumulator::~GradAccumulator() {
  if (dirty_) flush();
}

void GradAccumulator::backward(const StepActivations& act, std::span<const double> dlogits) {
  const PolicyDims& dims = params_->dims();
  const auto V = static_cast<std::size_t>(dims.vocab);
  const auto W = static_cast<std::size_t>(dims.window);
  const auto h = static_cast<std::size_t>(dims.hidden);
  if (dlogits.size() != V || act.context.size() != W) throw ContractViolation("backward shape mismatch");
  const ParamLayout& L = params_->layout();
  const double* theta = params_->flat().data();
  double* g = grad_->values().data();

  for (std::size_t j = 0; j < h; ++j) {
    const double a = act.hidden[j];
    const double* row = theta + L.out_w + j * V;
    double* grow = g + L.out_w + j * V;
    double acc = 0.0;
    for (std::size_t v = 0; v < V; ++v) {
      grow[v] += a * dlogits[v];
      acc += row[v] * dlogits[v];
    }
    dpre_[j] = acc * (1.0 - a * a);
  }
  for (std::size_t v = 0; v < V; ++v) g[L.out_b + v] += dlogits[v];
  for (std::size_t j = 0; j < h; ++j) g[L.hidden_b + j] += dpre_[j];

  for (std::size_t slot = 0; slot < W; ++slot) {
    const std::size_t cell = slot * V + static_cast<std::size_t>(act.context[slot]);
    touched_[cell] = 1;
    double* p = pending_.data() + cell * h;
    for (std::size_t j = 0; j < h; ++j) p[j] += dpre_[j];
  }
  dirty_ = true;
}

void GradAccumulator::flush() {
  if (!dirty_) return;
  const PolicyDims& dims = params_->dims();
  const auto V = static_cast<std::size_t>(dims.vocab);
  const auto W = static_cast<std::size_t>(dims.window);
  const auto d = static_cast<std::size_t>(dims.embed);
  const auto h = static_cast<std::size_t>(dims.hidden);
  const ParamLayout& L = params_->layout();
  const double* theta = params_->flat().data();
  double* g = grad_->values().data();

  for (std::size_t slot = 0; slot < W; ++slot) {
    for (std::size_t t = 0; t < V; ++t) {
      const std::size_t cell = slot * V + t;
      if (!touched_[cell]) continue;
      double* p = pending_.data() + cell * h;
      const double* emb = theta + L.embedding + t * d;
      double* gemb = g + L.embedding + t * d;
      for (std::size_t k = 0; k < d; ++k) {
        const std::size_t base = (slot * d + k) * h;
        const double* row = theta + L.hidden_w + base;
        double* grow = g + L.hidden_w + base;
        const double x = emb[k];
        double dx = 0.0;
        for (std::size_t j = 0; j < h; ++j) {
          grow[j] += x * p[j];
          dx += row[j] * p[j];
        }
        gemb[k] += dx;
      }
      std::fill(p, p + h, 0.0);
      touched_[cell] = 0;
    }
  }
  dirty_ = false;
}

namespace {

// Log-sum-exp of logits over the ids accepted by `in_set`; -inf when empty.
template <typename Pred>
double restricted_lse(std::span<const double> z, Pred in_set) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t v = 0; v < z.size(); ++v)
    if (in_set(static_cast<TokenId>(v))) m = std::max(m, z[v]);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (std::size_t v = 0; v < z.size(); ++v)
    if (in_set(static_cast<TokenId>(v))) s += std::exp(z[v] - m);
  return m + std::log(s);
}

template <typename Outcome, typename Support>
void add_restricted_dlogits(std::span<const double> z, Outcome in_outcome, Support in_support, double weight,
                            std::span<double> dz) {
  const double lse_a = restricted_lse(z, in_outcome);
  const double lse_s = restricted_lse(z, in_support);
  for (std::size_t v = 0; v < z.size(); ++v) {
    const auto t = static_cast<TokenId>(v);
    double d = 0.0;
    if (in_outcome(t)) d += std::exp(z[v] - lse_a);
    if (in_support(t)) d -= std::exp(z[v] - lse_s);
    dz[v] += weight * d;
  }
}

void check_token(std::span<const double> z, TokenId token, const TokenMask* mask) {
  if (token < 0 || static_cast<std::size_t>(token) >= z.size())
    throw ContractViolation("realized token id out of range: " + std::to_string(token));
  if (mask && !mask->allows(token))
    throw ContractViolation("mask excludes the realized token " + std::to_string(token));
}

}  // namespace

double masked_token_logprob(std::span<const double> z, TokenId token, const TokenMask* mask) {
  check_token(z, token, mask);
  const double lse = mask ? restricted_lse(z, [&](TokenId t) { return mask->allows(t); })
                          : restricted_lse(z, [](TokenId) { return true; });
  return z[static_cast<std::size_t>(token)] - lse;
}

void add_masked_token_dlogits(std::span<const double> z, TokenId token, const TokenMask* mask, double weight,
                              std::span<double> dz) {
  check_token(z, token, mask);
  add_restricted_dlogits(
      z, [&](TokenId t) { return t == token; },
      [&](TokenId t) { return mask == nullptr || mask->allows(t); }, weight, dz);
}

double event_logprob_from_logits(std::span<const double> z, const TokenSet& outcomes) {
  const double lse_a = restricted_lse(z, [&](TokenId t) { return outcomes.contains(t); });
  if (!std::isfinite(lse_a)) throw ContractViolation("empty outcome set");
  return lse_a - restricted_lse(z, [](TokenId) { return true; });
}

void add_event_dlogits(std::span<const double> z, const TokenSet& outcomes, double weight,
                       std::span<double> dz) {
  add_restricted_dlogits(
      z, [&](TokenId t) { return outcomes.contains(t); }, [](TokenId) { return true; }, weight, dz);
}

std::vector<double> logits(const PolicyParams& params, std::span<const TokenId> context) {
  return forward_step(params, context).logits;
}

double token_logprob(const PolicyParams& params, std::span<const TokenId> tokens, std::size_t position,
                     const TokenMask* mask) {
  const TokenSeq ctx = context_at(tokens, position, params.dims());
  return masked_token_logprob(forward_step(params, ctx).logits, tokens[position], mask);
}

std::vector<double> logprob_sequence(const PolicyParams& params, std::span<const TokenId> tokens,
                                     std::size_t prompt_len, const MaskSpec& masks) {
  if (prompt_len >= tokens.size()) throw ContractViolation("prompt_len must be < sequence length");
  std::vector<double> out;
  out.reserve(tokens.size() - prompt_len);
  for (std::size_t t = prompt_len; t < tokens.size(); ++t)
    out.push_back(token_logprob(params, tokens, t, masks.at(t)));
  return out;
}

double event_logprob(const PolicyParams& params, std::span<const TokenId> tokens, std::size_t position,
                     const TokenSet& outcomes) {
  const TokenSeq ctx = context_at(tokens, position, params.dims());
  return event_logprob_from_logits(forward_step(params, ctx).logits, outcomes);
}

TokenId sample_from_logits(std::span<const double> z, double temperature, const TokenMask* mask, Rng& rng) {
  if (!(temperature >= 0.0)) throw ContractViolation("temperature must be >= 0");
  auto allowed = [&](std::size_t v) { return mask == nullptr || mask->allows(static_cast<TokenId>(v)); };
  std::size_t best = z.size();
  for (std::size_t v = 0; v < z.size(); ++v)
    if (allowed(v) && (best == z.size() || z[v] > z[best])) best = v;
  if (best == z.size()) throw ContractViolation("mask leaves no token to sample");
  if (temperature == 0.0) return static_cast<TokenId>(best);

  std::vector<double> w(z.size(), 0.0);
  double total = 0.0;
  for (std::size_t v = 0; v < z.size(); ++v) {
    if (!allowed(v)) continue;
    w[v] = std::exp((z[v] - z[best]) / temperature);
    total += w[v];
  }
  double u = uniform01(rng) * total;
  std::size_t last = best;
  for (std::size_t v = 0; v < z.size(); ++v) {
    if (!allowed(v)) continue;
    last = v;
    if (u < w[v]) return static_cast<TokenId>(v);
    u -= w[v];
  }
  return static_cast<TokenId>(last);
}

TokenId sample_next(const PolicyParams& params, std::span<const TokenId> context, double temperature,
                    const TokenMask* mask, Rng& rng) {
  return sample_from_logits(logits(params, context), temperature, mask, rng);
}

void accumulate_weighted_grad(const PolicyParams& params, std::span<const TokenId> tokens,
                              std::size_t prompt_len, const MaskSpec& masks,
                              std::span<const double> weights, GradientVector& grad) {
  if (prompt_len >= tokens.size() || weights.size() != tokens.size() - prompt_len)
    throw ContractViolation("weights must cover exactly the generated positions");
  if (grad.size() != params.size()) throw ContractViolation("gradient size mismatch");
  std::vector<double> dz(static_cast<std::size_t>(params.dims().vocab));
  for (std::size_t t = prompt_len; t < tokens.size(); ++t) {
    const double w = weights[t - prompt_len];
    if (w == 0.0) continue;
    const StepActivations act = forward_step(params, context_at(tokens, t, params.dims()));
    std::fill(dz.begin(), dz.end(), 0.0);
    add_masked_token_dlogits(act.logits, tokens[t], masks.at(t), w, dz);
    backward_step(params, act, dz, grad);
  }
}

GradientVector weighted_logprob_grad(const PolicyParams& params, std::span<const TokenId> tokens,
                                     std::size_t prompt_len, const MaskSpec& masks,
                                     std::span<const double> weights) {
  GradientVector grad(params.size());
  accumulate_weighted_grad(params, tokens, prompt_len, masks, weights, grad);
  return grad;
}

void accumulate_event_grad(const PolicyParams& params, std::span<const TokenId> tokens, std::size_t position,
                           const TokenSet& outcomes, double weight, GradientVector& grad) {
  if (weight == 0.0) return;
  const StepActivations act = forward_step(params, context_at(tokens, position, params.dims()));
  std::vector<double> dz(static_cast<std::size_t>(params.dims().vocab), 0.0);
  add_event_dlogits(act.logits, outcomes, weight, dz);
  backward_step(params, act, dz, grad);
}

}  // namespace bpo
