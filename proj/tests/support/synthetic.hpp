#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "medsim/corpus.hpp"

namespace medsim::testing {

// A toy medical domain where each concept has several interchangeable
// surface forms. Question pairs are similar when they share concept and
// intent. The final-task training split only ever pairs a concept with the
// same surface form; the held-out split pairs different surface forms, so a
// model can only get those right if it learned the synonyms elsewhere (for
// example from question/answer pairs, whose answers use a different surface
// form than their question).
struct SynonymDomainConfig {
  int groups = 4;
  int concepts_per_group = 3;
  int synonyms = 3;
  int intents = 4;
  int fillers = 24;
  int filler_per_text = 2;
  int qa_samples_per_cell = 60;  // records per (concept, intent)
  int final_train_pairs = 160;
  int final_dev_pairs = 60;
  int final_test_pairs = 200;
};

struct SynonymDomain {
  std::vector<QaRecord> qa_corpus;
  std::vector<LabeledPair> final_train;
  std::vector<LabeledPair> final_dev;
  std::vector<LabeledPair> final_test;
};

SynonymDomain make_synonym_domain(const SynonymDomainConfig& cfg,
                                  std::uint64_t seed);

// 50-pair separable set: label 1 iff both texts mention the same topic word.
std::vector<LabeledPair> make_separable_pairs(std::size_t n, std::uint64_t seed);

}  // namespace medsim::testing
