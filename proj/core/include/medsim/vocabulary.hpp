#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace medsim {

// Lowercases, splits on whitespace and strips leading/trailing punctuation
// from each piece ("COVID-19?" -> "covid-19").
std::vector<std::string> model_tokens(std::string_view text);

class Vocabulary {
 public:
  static constexpr int kUnknown = 0;
  static constexpr std::string_view kUnknownToken = "[UNK]";

  Vocabulary();
  // Tokens ordered by descending frequency, ties broken lexicographically.
  // Tokens seen fewer than min_count times map to [UNK].
  static Vocabulary build(std::span<const std::string> texts,
                          std::size_t min_count = 1);
  static Vocabulary from_tokens(std::vector<std::string> tokens);

  int id(std::string_view token) const;
  std::vector<int> ids(std::string_view text) const;
  const std::string& token(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

}  // namespace medsim
