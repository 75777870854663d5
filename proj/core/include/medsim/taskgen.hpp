#pragma once

#include <cstdint>
#include <functional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "medsim/corpus.hpp"

namespace medsim {

struct TaskGenConfig {
  std::uint64_t rng_seed = 0;
  int negatives_per_positive = 1;
  int min_sentences_for_aa = 3;
  // Question ids (and answer ids) that must not appear in any emitted pair,
  // e.g. questions sampled for the evaluation set.
  std::set<std::string> excluded_ids;
};

struct TaskGenResult {
  std::vector<LabeledPair> pairs;
  // Parallel to pairs: true where the negative was drawn with replacement
  // because its category had too few distinct candidates.
  std::vector<bool> with_replacement;
  // Inputs that produced no pairs (too few sentences, lone member of a
  // category, excluded).
  std::size_t skipped = 0;
};

using SentenceSplitter =
    std::function<std::vector<std::string>(std::string_view)>;

// Splits after '.', '!' or '?' when followed by whitespace or end of text.
// Delimiters stay with their sentence; sentences are trimmed.
std::vector<std::string> split_sentences(std::string_view text);

// Question/answer matching. Positive: a question with its own answer.
// Negatives: answers from other records of the same category.
TaskGenResult build_qa_pairs(std::span<const QaRecord> corpus,
                             const TaskGenConfig& cfg);

// Answer completion. Each answer splits into start (first two sentences) and
// end (the rest); negatives pair a start with another end of its category.
TaskGenResult build_aa_pairs(std::span<const Answer> answers,
                             const SentenceSplitter& splitter,
                             const TaskGenConfig& cfg);
TaskGenResult build_aa_pairs(std::span<const Answer> answers,
                             const TaskGenConfig& cfg);

// Question/category matching; text_b is the category string.
TaskGenResult build_qc_pairs(std::span<const Question> questions,
                             const TaskGenConfig& cfg);

// Already-labeled question pairs (e.g. Quora) with kind forced to QQ.
std::vector<LabeledPair> passthrough_qq(std::span<const LabeledPair> pairs);

}  // namespace medsim
