#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "medsim/classifier.hpp"
#include "medsim/corpus.hpp"
#include "medsim/statistics.hpp"

namespace medsim {

// (1/T) * number of positions where prediction equals label.
double accuracy(std::span<const int> preds, std::span<const int> labels);

struct SplitRun {
  int split_index = 0;
  std::uint64_t rng_seed = 0;
  double accuracy = 0.0;
  std::string model_tag;
};

struct Comparison {
  std::string tag_a;
  std::string tag_b;
  double t_statistic = 0.0;
  double p_value = 1.0;
  int df = 0;
  bool degenerate = false;
};

struct EvalReport {
  std::string model_tag;
  std::vector<SplitRun> runs;
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation
  std::vector<Comparison> comparisons;

  std::vector<double> accuracies() const;
  nlohmann::ordered_json to_json() const;
  static EvalReport from_json(const nlohmann::json& j);
};

// Recomputes mean/std from runs.
void summarize(EvalReport& report);

struct SplitData {
  int split_index = 0;
  std::uint64_t seed = 0;
  std::vector<LabeledPair> train;
  std::vector<LabeledPair> dev;
  std::span<const LabeledPair> test;
};

// Trains a model on split.train (selecting on split.dev) and returns its
// accuracy on split.test.
using SplitTrainer = std::function<double(const SplitData&)>;

struct RunSplitsOptions {
  std::string model_tag = "model";
  double dev_fraction = 0.1;
  // Runs the k trainers on separate threads. The trainer must be thread-safe.
  bool parallel = false;
};

// The test set stays fixed; each seed draws a fresh seed-disjoint train/dev
// split of the pool. Trainer failures are rethrown naming the split index.
EvalReport run_splits(const SplitTrainer& trainer,
                      std::span<const LabeledPair> pool,
                      std::span<const LabeledPair> test,
                      std::span<const std::uint64_t> seeds, std::size_t k = 5,
                      const RunSplitsOptions& options = {});

// Paired t-test over the split-aligned accuracies of two reports.
Comparison compare(const EvalReport& a, const EvalReport& b,
                   stats::Alternative alt = stats::Alternative::two_sided);

// Plain-text table: one row per report, "mean ± std" in percent.
std::string render_table(std::span<const EvalReport> reports,
                         std::string_view regime);

enum class Verdict { consistently_correct, consistently_wrong, mixed };

std::string_view to_string(Verdict v);

struct ConsistencyVerdict {
  std::string pair_id;
  Verdict verdict = Verdict::mixed;
  int votes = 0;   // models that labeled the pair correctly
  int models = 0;
};

struct ConsistencyResult {
  std::vector<ConsistencyVerdict> verdicts;
  std::size_t skipped = 0;
  std::vector<std::string> diagnostics;
};

// Votes needed for a consistent verdict: 4 of 5, and a strict majority for
// larger ensembles.
int consistency_quorum(int models);
Verdict verdict_for(int correct, int models);

// Each pair is scored by every model; a model is correct when
// (score >= threshold) matches the label. Pairs on which any model throws are
// skipped and reported.
ConsistencyResult consistency_analysis(std::span<const PairScorer* const> models,
                                       std::span<const LabeledPair> pairs,
                                       double threshold = 0.5);

struct ProbeVerdict {
  std::string edited_text;
  ConsistencyVerdict verdict;
};

struct ProbeResult {
  ConsistencyVerdict base;
  std::vector<ProbeVerdict> edits;  // input order
};

// Holds text_a fixed and re-evaluates each rewrite of text_b with the base
// label. Nothing here feeds back into accuracy figures.
ProbeResult probe_with_edits(std::span<const PairScorer* const> models,
                             const LabeledPair& base_pair,
                             std::span<const std::string> edits,
                             double threshold = 0.5);

}  // namespace medsim
