#pragma once

// Test-only oracles. Nothing here calls into the code paths it is used to
// check: expressions are re-evaluated from their text, gradients come from
// finite differences, and grammars are re-parsed symbol by symbol.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bpo/env/vocab.hpp"
#include "bpo/policy/policy.hpp"

namespace bpo::testing {

// Straight-line interpreter over the expression text, left to right mod 10.
inline int oracle_eval(std::string_view expr) {
  int acc = -1;
  char op = 0;
  for (char c : expr) {
    if (c == ' ') continue;
    if (c == '+' || c == '*') {
      op = c;
      continue;
    }
    const int d = c - '0';
    if (acc < 0)
      acc = d;
    else
      acc = op == '+' ? (acc + d) % 10 : (acc * d) % 10;
  }
  return acc;
}

inline std::vector<int> oracle_trace(std::string_view expr) {
  std::vector<int> out;
  int acc = -1;
  char op = 0;
  for (char c : expr) {
    if (c == '+' || c == '*') {
      op = c;
      continue;
    }
    if (c == ' ') continue;
    const int d = c - '0';
    if (acc < 0) {
      acc = d;
    } else {
      acc = op == '+' ? (acc + d) % 10 : (acc * d) % 10;
      out.push_back(acc);
    }
  }
  return out;
}

// `<think> digit* </think> digit <eos>`, checked against the fixed ids.
inline bool oracle_item_grammar(const TokenSeq& r, bool expect_body) {
  if (r.size() < 4 || r.front() != 19) return false;
  std::size_t i = 1;
  while (i < r.size() && r[i] >= 0 && r[i] <= 9) ++i;
  const bool has_body = i > 1;
  if (has_body != expect_body) return false;
  return i + 3 == r.size() && r[i] == 20 && r[i + 1] >= 0 && r[i + 1] <= 9 && r[i + 2] == 17;
}

inline PolicyDims small_dims() {
  PolicyDims d;
  d.window = 6;
  d.embed = 5;
  d.hidden = 7;
  return d;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("bpo-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

// Central differences on `coords` distinct random coordinates; returns the
// worst relative error against `analytic` with denominator
// max(|analytic|, |numeric|, 1e-8).
template <class F>
double fd_max_rel_error(const PolicyParams& at, const F& value, std::span<const double> analytic, double step,
                        std::size_t coords, std::uint64_t seed) {
  PolicyParams p = at;
  std::vector<std::size_t> idx(p.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(std::min(coords, idx.size()));
  double worst = 0.0;
  for (std::size_t i : idx) {
    const double x = p.flat()[i];
    p.flat()[i] = x + step;
    const double up = value(p);
    p.flat()[i] = x - step;
    const double down = value(p);
    p.flat()[i] = x;
    const double numeric = (up - down) / (2.0 * step);
    const double den = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-8});
    worst = std::max(worst, std::abs(analytic[i] - numeric) / den);
  }
  return worst;
}

inline double rel_diff(std::span<const double> a, std::span<const double> b) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num = std::max(num, std::abs(a[i] - b[i]));
    den = std::max(den, std::max(std::abs(a[i]), std::abs(b[i])));
  }
  return den == 0.0 ? num : num / den;
}

}  // namespace bpo::testing
