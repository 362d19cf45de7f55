#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bpo {

using TokenId = std::int32_t;
using TokenSeq = std::vector<TokenId>;

// Fixed token layout. Content slots come first (digits, operators, four
// reserved slots), then the six specials. PAD is the last id: the policy
// left-pads short contexts with id V-1.
namespace tok {
inline constexpr TokenId kPlus = 10;
inline constexpr TokenId kTimes = 11;
inline constexpr TokenId kFirstReserved = 12;
inline constexpr TokenId kBos = 16;
inline constexpr TokenId kEos = 17;
inline constexpr TokenId kSep = 18;
inline constexpr TokenId kThinkOpen = 19;
inline constexpr TokenId kThinkClose = 20;
inline constexpr TokenId kPad = 21;
inline constexpr int kContentSlots = 16;
inline constexpr int kSpecials = 6;
inline constexpr int kVocabSize = kContentSlots + kSpecials;

constexpr bool is_digit(TokenId t) { return t >= 0 && t <= 9; }
constexpr bool is_operator(TokenId t) { return t == kPlus || t == kTimes; }
}  // namespace tok

struct Vocab {
  std::vector<std::string> symbols;
  TokenId bos = tok::kBos;
  TokenId eos = tok::kEos;
  TokenId sep = tok::kSep;
  TokenId pad = tok::kPad;
  TokenId think_open = tok::kThinkOpen;
  TokenId think_close = tok::kThinkClose;

  int size() const { return static_cast<int>(symbols.size()); }
  const std::string& symbol(TokenId id) const;
  std::optional<TokenId> id(std::string_view symbol) const;
};

Vocab build_vocab();

// Space separated symbols, e.g. "<think> 6 0 </think> 0 <eos>".
std::string render_tokens(const TokenSeq& tokens);
TokenSeq parse_tokens(std::string_view text);

}  // namespace bpo
