#include <benchmark/benchmark.h>

#include "fixtures.hpp"
#include "medsim/attention_encoder.hpp"
#include "medsim/faqmatch.hpp"
#include "medsim/statistics.hpp"
#include "medsim/training.hpp"

using namespace medsim;

namespace {

std::vector<FaqEntry> faqs(std::size_t n) {
  Rng rng(1);
  return medsim::testing::random_faqs(rng, n);
}

PairClassifier model_for(const std::vector<FaqEntry>& entries) {
  std::vector<std::string> texts;
  for (const auto& e : entries) texts.push_back(e.question);
  AttentionEncoderConfig cfg;
  cfg.init_seed = 1;
  return PairClassifier(std::make_unique<AttentionEncoder>(Vocabulary::build(texts), cfg), 1);
}

void BM_OverlapScore(benchmark::State& state) {
  auto entries = faqs(1000);
  std::vector<std::string> qs;
  for (const auto& e : entries) qs.push_back(e.question);
  auto idf = build_idf(qs);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(overlap_score(qs[i % 1000], qs[(i * 7 + 3) % 1000], idf));
    ++i;
  }
}
BENCHMARK(BM_OverlapScore);

// Full pipeline over n FAQs; with the filter off every FAQ reaches the model.
void BM_Match(benchmark::State& state) {
  auto entries = faqs(static_cast<std::size_t>(state.range(0)));
  auto model = model_for(entries);
  FaqIndex index(entries, ReplacementMap::covid_default());
  MatchOptions opts;
  opts.filter_threshold = state.range(1) ? 0.2 : 0.0;
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(match(entries[i++ % entries.size()].question, index, model, opts));
  }
}
BENCHMARK(BM_Match)->Args({1000, 0})->Args({1000, 1})->Unit(benchmark::kMillisecond);

void BM_TrainingEpoch(benchmark::State& state) {
  Rng rng(2);
  auto pairs = medsim::testing::mqp_shaped_pairs(rng, 4, 16);
  std::vector<std::string> texts;
  for (const auto& p : pairs) {
    texts.push_back(p.text_a);
    texts.push_back(p.text_b);
  }
  AttentionEncoderConfig cfg;
  PairClassifier model(std::make_unique<AttentionEncoder>(Vocabulary::build(texts), cfg), 1);
  TrainConfig tc;
  tc.learning_rate = 0.1;
  tc.batch_size = 16;
  tc.epochs = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(finetune(model, pairs, std::nullopt, tc));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(pairs.size()));
}
BENCHMARK(BM_TrainingEpoch)->Unit(benchmark::kMillisecond);

void BM_PairedTTest(benchmark::State& state) {
  std::vector<double> a = {0.80, 0.81, 0.79, 0.82, 0.80};
  std::vector<double> b = {0.78, 0.79, 0.78, 0.80, 0.79};
  for (auto _ : state) benchmark::DoNotOptimize(stats::paired_t_test(a, b));
}
BENCHMARK(BM_PairedTTest);

}  // namespace

BENCHMARK_MAIN();
