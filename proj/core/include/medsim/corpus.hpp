#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace medsim {

struct Question {
  std::string id;
  std::string text;
  std::optional<std::string> category;
  std::optional<std::string> labeler_id;
  std::optional<std::string> seed_id;
};

struct Answer {
  std::string id;
  std::string question_id;
  std::string text;
  std::optional<std::string> category;
};

// One row of a question/answer corpus as stored on disk.
struct QaRecord {
  Question question;
  Answer answer;
};

enum class PairKind { QQ, QA, AA, QC };

std::string_view to_string(PairKind kind);
PairKind parse_pair_kind(std::string_view s);  // throws ValidationError

// The universal training/evaluation record.
struct LabeledPair {
  std::string text_a;
  std::string text_b;
  int label = 0;  // 1 = similar / matching, 0 = different
  PairKind kind = PairKind::QQ;
  std::optional<std::string> labeler_id;
  std::optional<std::string> seed_id;
  std::optional<std::string> id;

  friend bool operator==(const LabeledPair&, const LabeledPair&) = default;
};

// Throws ValidationError describing the first violated invariant.
void validate(const LabeledPair& pair);

enum class PairFormat { jsonl, csv };

PairFormat parse_pair_format(std::string_view s);
// Picks the format from the file extension, defaulting to jsonl.
PairFormat guess_pair_format(const std::filesystem::path& path);

// Loads and validates pairs. Errors name the 1-based row (line) and field.
std::vector<LabeledPair> load_pairs(const std::filesystem::path& path,
                                    PairFormat format);
std::vector<LabeledPair> parse_pairs_jsonl(std::string_view content);
// Accepts the canonical header (text_a,text_b,label,...) or the released
// MQP layout (dr_id,question_1,question_2,label), with or without header.
std::vector<LabeledPair> parse_pairs_csv(std::string_view content);

std::string to_jsonl(std::span<const LabeledPair> pairs);
void save_pairs(const std::filesystem::path& path,
                std::span<const LabeledPair> pairs);

std::vector<QaRecord> load_qa_corpus(const std::filesystem::path& path);
std::vector<QaRecord> parse_qa_jsonl(std::string_view content);
std::string to_jsonl(std::span<const QaRecord> records);

// Labeler sets for the train / dev / test partitions.
struct SplitAssignment {
  std::set<std::string> train_labelers;
  std::set<std::string> dev_labelers;
  std::set<std::string> test_labelers;
};

struct PairSplit {
  std::vector<LabeledPair> train;
  std::vector<LabeledPair> dev;
  std::vector<LabeledPair> test;
};

// Partitions by labeler. Rejects overlapping labeler sets, pairs whose
// labeler is unassigned, and any seed_id that appears in both train and test.
PairSplit split_by_labeler(std::span<const LabeledPair> pairs,
                           const SplitAssignment& assignment);

// Fallback when a file carries no labeler ids: whole seed groups are assigned
// at random so that no seed question straddles two partitions.
PairSplit split_by_seed(std::span<const LabeledPair> pairs,
                        double dev_fraction, double test_fraction,
                        std::uint64_t seed);

struct CorpusStats {
  std::size_t pair_count = 0;
  std::size_t unique_question_count = 0;
  std::size_t token_min = 0;
  std::size_t token_max = 0;
  double token_median = 0.0;
  double token_mean = 0.0;
};

using Tokenizer = std::function<std::vector<std::string>(std::string_view)>;

// Token statistics over the distinct question texts. pair_count is left 0;
// pair_stats fills it.
CorpusStats compute_stats(std::span<const Question> questions,
                          Tokenizer tokenizer);
CorpusStats compute_stats(std::span<const Question> questions);

// Both sides of every pair count as questions; meant for QQ files.
CorpusStats pair_stats(std::span<const LabeledPair> pairs);

}  // namespace medsim
