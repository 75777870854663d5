#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "medsim/classifier.hpp"
#include "medsim/corpus.hpp"
#include "medsim/faqmatch.hpp"
#include "medsim/random.hpp"

namespace medsim::testing {

// Scores a pair by the Jaccard similarity of its content tokens, so a
// verbatim question scores 1 and a disjoint one 0.
class JaccardScorer final : public PairScorer {
 public:
  double score(std::string_view a, std::string_view b) const override;
  std::string version() const override { return "jaccard-stub"; }
};

// Returns a fixed probability for every pair.
class ConstantScorer final : public PairScorer {
 public:
  explicit ConstantScorer(double p) : p_(p) {}
  double score(std::string_view, std::string_view) const override { return p_; }
  std::string version() const override { return "constant-stub"; }

 private:
  double p_;
};

// Delegates to a callable; used for scripted and failing models.
class FunctionScorer final : public PairScorer {
 public:
  explicit FunctionScorer(std::function<double(std::string_view, std::string_view)> fn)
      : fn_(std::move(fn)) {}
  double score(std::string_view a, std::string_view b) const override { return fn_(a, b); }

 private:
  std::function<double(std::string_view, std::string_view)> fn_;
};

// Lowercase words drawn from a small medical-flavoured vocabulary, with
// occasional COVID spellings and punctuation mixed in.
std::string random_text(Rng& rng, std::size_t min_words, std::size_t max_words);

std::vector<FaqEntry> random_faqs(Rng& rng, std::size_t n);

// QA corpus with `categories` categories and `records` records, several
// sentences per answer.
std::vector<QaRecord> random_qa_corpus(Rng& rng, std::size_t categories,
                                       std::size_t records);

// MQP-shaped QQ pairs: each labeler writes a similar and a different pair
// for each of their seed questions.
std::vector<LabeledPair> mqp_shaped_pairs(Rng& rng, std::size_t labelers,
                                          std::size_t seeds_per_labeler);

// Unique temporary directory, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(std::string_view name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace medsim::testing
