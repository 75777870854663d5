#include "medsim/taskgen.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

#include "medsim/error.hpp"
#include "medsim/random.hpp"
#include "medsim/text.hpp"

namespace medsim {

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  auto flush = [&](std::size_t end) {
    auto s = text::trim(text.substr(start, end - start));
    if (!s.empty()) out.emplace_back(s);
    start = end;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c != '.' && c != '!' && c != '?') continue;
    std::size_t j = i + 1;
    // Runs like "?!" or "..." end together.
    while (j < text.size() && (text[j] == '.' || text[j] == '!' || text[j] == '?')) ++j;
    if (j == text.size() || text[j] == ' ' || text[j] == '\t' ||
        text[j] == '\n' || text[j] == '\r') {
      flush(j);
    }
    i = j - 1;
  }
  flush(text.size());
  return out;
}

namespace {

void check_config(const TaskGenConfig& cfg) {
  if (cfg.negatives_per_positive < 1) {
    throw ValidationError("negatives_per_positive must be >= 1");
  }
}

struct Draw {
  std::vector<std::size_t> picks;
  bool with_replacement = false;
};

// Picks k indices from pool_size candidates: distinct when possible,
// otherwise independent draws.
Draw draw_negatives(std::size_t pool_size, int k, Rng& rng) {
  Draw d;
  auto want = static_cast<std::size_t>(k);
  if (pool_size >= want) {
    std::vector<std::size_t> idx(pool_size);
    for (std::size_t i = 0; i < pool_size; ++i) idx[i] = i;
    for (std::size_t i = 0; i < want; ++i) {
      std::size_t j = i + uniform_index(rng, pool_size - i);
      std::swap(idx[i], idx[j]);
      d.picks.push_back(idx[i]);
    }
  } else {
    d.with_replacement = true;
    for (std::size_t i = 0; i < want; ++i) {
      d.picks.push_back(uniform_index(rng, pool_size));
    }
  }
  return d;
}

// Distinct strings of one category, first-appearance order.
struct CategoryPool {
  std::vector<std::string> texts;
  std::unordered_map<std::string, std::size_t> index;

  void add(const std::string& t) {
    if (index.emplace(t, texts.size()).second) texts.push_back(t);
  }
  // Every text except `own`.
  std::vector<const std::string*> others(const std::string& own) const {
    std::vector<const std::string*> out;
    out.reserve(texts.size());
    for (const auto& t : texts) {
      if (t != own) out.push_back(&t);
    }
    return out;
  }
};

class CategoryStreams {
 public:
  explicit CategoryStreams(std::uint64_t seed) : seed_(seed) {}
  Rng& operator[](const std::string& category) {
    auto it = streams_.find(category);
    if (it == streams_.end()) {
      it = streams_.emplace(category, Rng(hash_mix(seed_, category))).first;
    }
    return it->second;
  }

 private:
  std::uint64_t seed_;
  std::map<std::string, Rng> streams_;
};

}  // namespace

TaskGenResult build_qa_pairs(std::span<const QaRecord> corpus,
                             const TaskGenConfig& cfg) {
  check_config(cfg);
  std::map<std::string, CategoryPool> pools;
  std::vector<const QaRecord*> kept;
  TaskGenResult result;
  for (const auto& rec : corpus) {
    if (!rec.question.category) {
      throw ValidationError("record '" + rec.question.id + "' has no category");
    }
    if (cfg.excluded_ids.count(rec.question.id) ||
        cfg.excluded_ids.count(rec.answer.id)) {
      ++result.skipped;
      continue;
    }
    pools[*rec.question.category].add(rec.answer.text);
    kept.push_back(&rec);
  }

  CategoryStreams streams(cfg.rng_seed);
  for (const QaRecord* rec : kept) {
    const std::string& category = *rec->question.category;
    auto candidates = pools[category].others(rec->answer.text);
    if (candidates.empty()) {
      throw ValidationError("category '" + category +
                            "' has a single distinct answer; cannot draw "
                            "same-category negatives");
    }
    LabeledPair pos{.text_a = rec->question.text,
                    .text_b = rec->answer.text,
                    .label = 1,
                    .kind = PairKind::QA,
                    .labeler_id = std::nullopt,
                    .seed_id = rec->question.id,
                    .id = std::nullopt};
    result.pairs.push_back(pos);
    result.with_replacement.push_back(false);

    Draw draw = draw_negatives(candidates.size(), cfg.negatives_per_positive,
                               streams[category]);
    for (std::size_t pick : draw.picks) {
      LabeledPair neg = pos;
      neg.text_b = *candidates[pick];
      neg.label = 0;
      result.pairs.push_back(std::move(neg));
      result.with_replacement.push_back(draw.with_replacement);
    }
  }
  return result;
}

TaskGenResult build_aa_pairs(std::span<const Answer> answers,
                             const SentenceSplitter& splitter,
                             const TaskGenConfig& cfg) {
  check_config(cfg);
  if (cfg.min_sentences_for_aa < 3) {
    throw ValidationError("min_sentences_for_aa must be >= 3");
  }
  struct Halves {
    const Answer* answer;
    std::string start;
    std::string end;
  };
  auto join = [](const std::vector<std::string>& parts, std::size_t from,
                 std::size_t to) {
    std::string out;
    for (std::size_t i = from; i < to; ++i) {
      if (!out.empty()) out += ' ';
      out += parts[i];
    }
    return out;
  };

  TaskGenResult result;
  std::vector<Halves> halves;
  std::map<std::string, CategoryPool> ends;
  for (const auto& a : answers) {
    if (!a.category) {
      throw ValidationError("answer '" + a.id + "' has no category");
    }
    if (cfg.excluded_ids.count(a.id) || cfg.excluded_ids.count(a.question_id)) {
      ++result.skipped;
      continue;
    }
    auto sentences = splitter(a.text);
    if (sentences.size() < static_cast<std::size_t>(cfg.min_sentences_for_aa)) {
      ++result.skipped;
      continue;
    }
    Halves h{&a, join(sentences, 0, 2), join(sentences, 2, sentences.size())};
    ends[*a.category].add(h.end);
    halves.push_back(std::move(h));
  }

  CategoryStreams streams(cfg.rng_seed);
  for (const auto& h : halves) {
    const std::string& category = *h.answer->category;
    auto candidates = ends[category].others(h.end);
    if (candidates.empty()) {
      // No other end to pair with; keep the task balanced by dropping it.
      ++result.skipped;
      continue;
    }
    LabeledPair pos{.text_a = h.start,
                    .text_b = h.end,
                    .label = 1,
                    .kind = PairKind::AA,
                    .labeler_id = std::nullopt,
                    .seed_id = h.answer->question_id.empty()
                                   ? h.answer->id
                                   : h.answer->question_id,
                    .id = std::nullopt};
    result.pairs.push_back(pos);
    result.with_replacement.push_back(false);
    Draw draw = draw_negatives(candidates.size(), cfg.negatives_per_positive,
                               streams[category]);
    for (std::size_t pick : draw.picks) {
      LabeledPair neg = pos;
      neg.text_b = *candidates[pick];
      neg.label = 0;
      result.pairs.push_back(std::move(neg));
      result.with_replacement.push_back(draw.with_replacement);
    }
  }
  return result;
}

TaskGenResult build_aa_pairs(std::span<const Answer> answers,
                             const TaskGenConfig& cfg) {
  return build_aa_pairs(answers, split_sentences, cfg);
}

TaskGenResult build_qc_pairs(std::span<const Question> questions,
                             const TaskGenConfig& cfg) {
  check_config(cfg);
  CategoryPool categories;
  for (const auto& q : questions) {
    if (!q.category) {
      throw ValidationError("question '" + q.id + "' has no category");
    }
    categories.add(*q.category);
  }
  if (categories.texts.size() < 2) {
    throw ValidationError("question/category task needs at least 2 categories");
  }
  // Sorted so the candidate list does not depend on input order.
  std::sort(categories.texts.begin(), categories.texts.end());

  CategoryStreams streams(cfg.rng_seed);
  TaskGenResult result;
  for (const auto& q : questions) {
    if (cfg.excluded_ids.count(q.id)) {
      ++result.skipped;
      continue;
    }
    const std::string& own = *q.category;
    auto candidates = categories.others(own);
    LabeledPair pos{.text_a = q.text,
                    .text_b = own,
                    .label = 1,
                    .kind = PairKind::QC,
                    .labeler_id = std::nullopt,
                    .seed_id = q.id,
                    .id = std::nullopt};
    result.pairs.push_back(pos);
    result.with_replacement.push_back(false);
    Draw draw = draw_negatives(candidates.size(), cfg.negatives_per_positive,
                               streams[own]);
    for (std::size_t pick : draw.picks) {
      LabeledPair neg = pos;
      neg.text_b = *candidates[pick];
      neg.label = 0;
      result.pairs.push_back(std::move(neg));
      result.with_replacement.push_back(draw.with_replacement);
    }
  }
  return result;
}

std::vector<LabeledPair> passthrough_qq(std::span<const LabeledPair> pairs) {
  std::vector<LabeledPair> out(pairs.begin(), pairs.end());
  for (auto& p : out) p.kind = PairKind::QQ;
  return out;
}

}  // namespace medsim
