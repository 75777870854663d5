#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "medsim/classifier.hpp"

namespace medsim {

// Case-insensitive term rewrites applied before matching (e.g. names the
// model has never seen -> "the disease").
class ReplacementMap {
 public:
  struct Rule {
    std::string pattern;  // stored lowercased
    std::string replacement;
  };

  ReplacementMap() = default;
  // Rules are reordered longest-pattern-first; empty patterns are rejected.
  explicit ReplacementMap(std::vector<Rule> rules);

  static ReplacementMap covid_default();
  static ReplacementMap from_json(const nlohmann::json& j);
  static ReplacementMap load(const std::string& path);
  nlohmann::json to_json() const;

  const std::vector<Rule>& rules() const { return rules_; }
  bool empty() const { return rules_.empty(); }

 private:
  std::vector<Rule> rules_;
};

// Replaces each pattern where it occurs as a whole token: the neighbouring
// characters must not be letters or digits. Patterns may contain hyphens
// ("covid-19"). One left-to-right pass, so replacements are never rescanned.
std::string preprocess(std::string_view text, const ReplacementMap& map);

// The fixed English stopword list (50 words) used by the overlap filter.
const std::set<std::string, std::less<>>& default_stopwords();

// Lowercased alphanumeric tokens with stopwords removed, deduplicated.
std::vector<std::string> content_tokens(
    std::string_view text, const std::set<std::string, std::less<>>& stopwords);

class IdfIndex {
 public:
  IdfIndex() = default;

  std::size_t document_count() const { return documents_; }
  // 0 for tokens never seen.
  std::size_t document_frequency(std::string_view token) const;
  // ln((1 + N) / (1 + df)) + 1
  double idf(std::string_view token) const;
  const std::set<std::string, std::less<>>& stopwords() const { return *stopwords_; }
  const std::unordered_map<std::string, std::size_t>& frequencies() const { return df_; }

 private:
  friend IdfIndex build_idf(std::span<const std::string> faq_questions);
  std::size_t documents_ = 0;
  std::unordered_map<std::string, std::size_t> df_;
  const std::set<std::string, std::less<>>* stopwords_ = &default_stopwords();
};

IdfIndex build_idf(std::span<const std::string> faq_questions);

// idf mass of the user's distinct content tokens that also appear in the FAQ
// question, divided by the idf mass of all of the user's content tokens.
double overlap_score(std::string_view user_q, std::string_view faq_q,
                     const IdfIndex& idf);

struct FaqEntry {
  std::string id;
  std::string question;
  std::string answer;
  std::string source;
  std::string last_updated;  // ISO-8601 date, YYYY-MM-DD[Thh:mm:ss...]
  std::string preprocessed_question;
};

// Accepts YYYY-MM-DD optionally followed by 'T' and a time.
bool is_iso8601_date(std::string_view s);

// Immutable FAQ collection with its idf index and cached preprocessing.
class FaqIndex {
 public:
  FaqIndex(std::vector<FaqEntry> entries, ReplacementMap map);

  const std::vector<FaqEntry>& entries() const { return entries_; }
  const IdfIndex& idf() const { return idf_; }
  const ReplacementMap& replacements() const { return map_; }
  std::size_t size() const { return entries_.size(); }

 private:
  std::vector<FaqEntry> entries_;
  ReplacementMap map_;
  IdfIndex idf_;
};

struct MatchOptions {
  double filter_threshold = 0.2;
  double decision_threshold = 0.5;
  // Extension point for cheaper candidate generation: when set, only the
  // returned entry indices go through the filter and the model.
  std::function<std::vector<std::size_t>(std::string_view preprocessed_user_q,
                                         const FaqIndex&)>
      candidates;
};

struct MatchResult {
  std::string faq_id;
  std::size_t entry_index = 0;
  double overlap = 0.0;
  double p_positive = 0.0;
  bool passed_filter = false;
  int rank = 0;  // 1-based
};

// preprocess -> overlap filter -> model scoring -> decision threshold ->
// sort by (p_positive desc, faq_id asc). An empty result is a valid answer.
std::vector<MatchResult> match(std::string_view user_q, const FaqIndex& faqs,
                               const PairScorer& model,
                               const MatchOptions& options = {});

}  // namespace medsim
