#include "bpo/env/vocab.hpp"

#include <sstream>

#include "bpo/error.hpp"

namespace bpo {

Vocab build_vocab() {
  Vocab v;
  v.symbols.reserve(tok::kVocabSize);
  for (int d = 0; d < 10; ++d) v.symbols.push_back(std::to_string(d));
  v.symbols.emplace_back("+");
  v.symbols.emplace_back("*");
  for (int r = 0; r < 4; ++r) v.symbols.push_back("<r" + std::to_string(r) + ">");
  v.symbols.emplace_back("<bos>");
  v.symbols.emplace_back("<eos>");
  v.symbols.emplace_back("<sep>");
  v.symbols.emplace_back("<think>");
  v.symbols.emplace_back("</think>");
  v.symbols.emplace_back("<pad>");
  return v;
}

const std::string& Vocab::symbol(TokenId id) const {
  if (id < 0 || id >= size()) throw ContractViolation("token id out of range: " + std::to_string(id));
  return symbols[static_cast<std::size_t>(id)];
}

std::optional<TokenId> Vocab::id(std::string_view s) const {
  for (std::size_t i = 0; i < symbols.size(); ++i)
    if (symbols[i] == s) return static_cast<TokenId>(i);
  return std::nullopt;
}

std::string render_tokens(const TokenSeq& tokens) {
  static const Vocab vocab = build_vocab();
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += vocab.symbol(tokens[i]);
  }
  return out;
}

TokenSeq parse_tokens(std::string_view text) {
  static const Vocab vocab = build_vocab();
  TokenSeq out;
  std::istringstream in{std::string(text)};
  std::string word;
  while (in >> word) {
    auto id = vocab.id(word);
    if (!id) throw ContractViolation("unknown token symbol '" + word + "'");
    out.push_back(*id);
  }
  return out;
}

}  // namespace bpo
