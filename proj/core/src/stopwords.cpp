#include <array>
#include <set>
#include <string>
#include <string_view>

#include "medsim/faqmatch.hpp"

namespace medsim {

namespace {

constexpr std::array<std::string_view, 50> kStopwords = {
    "a",    "about", "am",    "an",     "and",   "are",   "at",    "be",
    "been", "but",   "by",    "can",    "could", "did",   "do",    "does",
    "for",  "from",  "had",   "has",    "have",  "how",   "i",     "if",
    "in",   "is",    "it",    "its",    "me",    "my",    "of",    "on",
    "or",   "should", "that", "the",    "there", "these", "this",  "those",
    "to",   "was",   "were",  "what",   "which", "who",   "will",  "with",
    "would", "you"};

}  // namespace

const std::set<std::string, std::less<>>& default_stopwords() {
  static const std::set<std::string, std::less<>> words(kStopwords.begin(),
                                                        kStopwords.end());
  return words;
}

}  // namespace medsim
