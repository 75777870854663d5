#include "medsim/faqmatch.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "medsim/error.hpp"
#include "medsim/text.hpp"

namespace medsim {

ReplacementMap::ReplacementMap(std::vector<Rule> rules) : rules_(std::move(rules)) {
  for (auto& r : rules_) {
    if (text::trim(r.pattern).empty()) {
      throw ValidationError("replacement pattern must be non-empty");
    }
    r.pattern = text::to_lower_ascii(r.pattern);
  }
  std::stable_sort(rules_.begin(), rules_.end(), [](const Rule& a, const Rule& b) {
    return a.pattern.size() > b.pattern.size();
  });
}

ReplacementMap ReplacementMap::covid_default() {
  return ReplacementMap({{"covid", "the disease"},
                         {"covid-19", "the disease"},
                         {"coronavirus", "the disease"}});
}

ReplacementMap ReplacementMap::from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw ValidationError("replacement map must be a json list");
  std::vector<Rule> rules;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& o = j[i];
    if (!o.is_object() || !o.contains("pattern") || !o.contains("replacement") ||
        !o["pattern"].is_string() || !o["replacement"].is_string()) {
      throw ValidationError("replacement map entry " + std::to_string(i) +
                            ": expected {pattern, replacement} strings");
    }
    rules.push_back({o["pattern"].get<std::string>(),
                     o["replacement"].get<std::string>()});
  }
  return ReplacementMap(std::move(rules));
}

ReplacementMap ReplacementMap::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open replacement map '" + path + "'");
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("replacement map '" + path + "': " + e.what());
  }
}

nlohmann::json ReplacementMap::to_json() const {
  auto out = nlohmann::json::array();
  for (const auto& r : rules_) {
    out.push_back({{"pattern", r.pattern}, {"replacement", r.replacement}});
  }
  return out;
}

std::string preprocess(std::string_view input, const ReplacementMap& map) {
  if (map.empty()) return std::string(input);
  const std::string lower = text::to_lower_ascii(input);
  const std::size_t n = input.size();
  std::string out;
  out.reserve(n);
  std::size_t i = 0;
  while (i < n) {
    bool left_ok = i == 0 || !text::is_word_byte(static_cast<unsigned char>(input[i - 1]));
    bool replaced = false;
    if (left_ok) {
      for (const auto& rule : map.rules()) {
        const std::size_t len = rule.pattern.size();
        if (i + len > n || lower.compare(i, len, rule.pattern) != 0) continue;
        if (i + len < n &&
            text::is_word_byte(static_cast<unsigned char>(input[i + len]))) {
          continue;
        }
        out += rule.replacement;
        i += len;
        replaced = true;
        break;
      }
    }
    if (!replaced) out.push_back(input[i++]);
  }
  return out;
}

std::vector<std::string> content_tokens(
    std::string_view s, const std::set<std::string, std::less<>>& stopwords) {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (auto& tok : text::alnum_tokens(s)) {
    if (stopwords.count(tok)) continue;
    if (seen.insert(tok).second) out.push_back(std::move(tok));
  }
  return out;
}

std::size_t IdfIndex::document_frequency(std::string_view token) const {
  auto it = df_.find(std::string(token));
  return it == df_.end() ? 0 : it->second;
}

double IdfIndex::idf(std::string_view token) const {
  const double n = static_cast<double>(documents_);
  const double df = static_cast<double>(document_frequency(token));
  return std::log((1.0 + n) / (1.0 + df)) + 1.0;
}

IdfIndex build_idf(std::span<const std::string> faq_questions) {
  if (faq_questions.empty()) throw ValidationError("build_idf: empty corpus");
  IdfIndex index;
  index.documents_ = faq_questions.size();
  for (const auto& q : faq_questions) {
    for (auto& tok : content_tokens(q, *index.stopwords_)) ++index.df_[tok];
  }
  return index;
}

double overlap_score(std::string_view user_q, std::string_view faq_q,
                     const IdfIndex& idf) {
  auto user = content_tokens(user_q, idf.stopwords());
  if (user.empty()) return 0.0;
  auto faq = content_tokens(faq_q, idf.stopwords());
  std::unordered_set<std::string> faq_set(faq.begin(), faq.end());
  double shared = 0.0;
  double total = 0.0;
  for (const auto& tok : user) {
    double w = idf.idf(tok);
    total += w;
    if (faq_set.count(tok)) shared += w;
  }
  return shared / total;
}

bool is_iso8601_date(std::string_view s) {
  if (s.size() < 10) return false;
  for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u}) {
    if (s[i] < '0' || s[i] > '9') return false;
  }
  if (s[4] != '-' || s[7] != '-') return false;
  if (s.size() > 10 && s[10] != 'T' && s[10] != ' ') return false;
  auto num = [&](std::size_t pos, std::size_t len) {
    int v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) v = v * 10 + (s[i] - '0');
    return v;
  };
  std::chrono::year_month_day ymd{std::chrono::year{num(0, 4)},
                                  std::chrono::month{static_cast<unsigned>(num(5, 2))},
                                  std::chrono::day{static_cast<unsigned>(num(8, 2))}};
  return ymd.ok();
}

FaqIndex::FaqIndex(std::vector<FaqEntry> entries, ReplacementMap map)
    : entries_(std::move(entries)), map_(std::move(map)) {
  if (entries_.empty()) throw ValidationError("FAQ set is empty");
  std::unordered_set<std::string> ids;
  std::vector<std::string> questions;
  questions.reserve(entries_.size());
  for (auto& e : entries_) {
    if (!ids.insert(e.id).second) {
      throw ValidationError("duplicate FAQ id '" + e.id + "'");
    }
    e.preprocessed_question = preprocess(e.question, map_);
    questions.push_back(e.preprocessed_question);
  }
  idf_ = build_idf(questions);
}

std::vector<MatchResult> match(std::string_view user_q, const FaqIndex& faqs,
                               const PairScorer& model,
                               const MatchOptions& options) {
  if (text::trim(user_q).empty()) throw ValidationError("empty user question");
  const std::string query = preprocess(user_q, faqs.replacements());

  std::vector<std::size_t> candidates;
  if (options.candidates) {
    candidates = options.candidates(query, faqs);
  } else {
    candidates.resize(faqs.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) candidates[i] = i;
  }

  std::vector<MatchResult> results;
  for (std::size_t idx : candidates) {
    if (idx >= faqs.size()) throw ValidationError("candidate index out of range");
    const auto& entry = faqs.entries()[idx];
    double overlap = overlap_score(query, entry.preprocessed_question, faqs.idf());
    if (overlap < options.filter_threshold) continue;
    double p = model.score(query, entry.preprocessed_question);
    if (!(p >= 0.0 && p <= 1.0)) {
      throw RuntimeFailure("scorer returned a probability outside [0, 1]");
    }
    if (p < options.decision_threshold) continue;
    results.push_back({entry.id, idx, overlap, p, true, 0});
  }
  std::sort(results.begin(), results.end(),
            [](const MatchResult& a, const MatchResult& b) {
              if (a.p_positive != b.p_positive) return a.p_positive > b.p_positive;
              return a.faq_id < b.faq_id;
            });
  for (std::size_t i = 0; i < results.size(); ++i) {
    results[i].rank = static_cast<int>(i + 1);
  }
  return results;
}

}  // namespace medsim
