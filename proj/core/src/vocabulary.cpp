#include "medsim/vocabulary.hpp"

#include <algorithm>
#include <map>

#include "medsim/error.hpp"
#include "medsim/text.hpp"

namespace medsim {

std::vector<std::string> model_tokens(std::string_view text) {
  std::vector<std::string> out;
  for (auto& piece : text::split_whitespace(text)) {
    std::size_t b = 0;
    std::size_t e = piece.size();
    while (b < e && !text::is_word_byte(static_cast<unsigned char>(piece[b]))) ++b;
    while (e > b && !text::is_word_byte(static_cast<unsigned char>(piece[e - 1]))) --e;
    if (e > b) out.push_back(text::to_lower_ascii(std::string_view(piece).substr(b, e - b)));
  }
  return out;
}

Vocabulary::Vocabulary() {
  tokens_.emplace_back(kUnknownToken);
  index_.emplace(tokens_.back(), kUnknown);
}

Vocabulary Vocabulary::build(std::span<const std::string> texts,
                             std::size_t min_count) {
  std::map<std::string, std::size_t> counts;
  for (const auto& t : texts) {
    for (auto& tok : model_tokens(t)) ++counts[tok];
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(),
                                                          counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> tokens;
  for (auto& [tok, n] : ranked) {
    if (n >= min_count && tok != kUnknownToken) tokens.push_back(tok);
  }
  return from_tokens(std::move(tokens));
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens) {
  Vocabulary v;
  for (auto& tok : tokens) {
    if (tok == kUnknownToken) continue;
    auto next = static_cast<int>(v.tokens_.size());
    if (!v.index_.emplace(tok, next).second) {
      throw ValidationError("duplicate vocabulary token '" + tok + "'");
    }
    v.tokens_.push_back(std::move(tok));
  }
  return v;
}

int Vocabulary::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnknown : it->second;
}

std::vector<int> Vocabulary::ids(std::string_view text) const {
  std::vector<int> out;
  for (const auto& tok : model_tokens(text)) out.push_back(id(tok));
  return out;
}

}  // namespace medsim
