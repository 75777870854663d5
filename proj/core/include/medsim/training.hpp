#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "medsim/classifier.hpp"
#include "medsim/corpus.hpp"

namespace medsim {

struct TrainConfig {
  std::size_t max_tokens = 200;
  double learning_rate = 2e-5;
  std::size_t batch_size = 16;
  // Exactly one of these is set: a fixed number of epochs, or early stopping
  // on dev accuracy with this patience.
  std::optional<int> epochs;
  std::optional<int> early_stop_patience;
  // Upper bound on epochs when early stopping.
  int max_epochs = 100;
  // Rescales each batch gradient to at most this global L2 norm; 0 disables.
  double clip_norm = 0.0;
  std::uint64_t rng_seed = 0;

  void validate() const;  // throws ValidationError
  nlohmann::ordered_json to_json() const;
};

struct TrainReport {
  std::vector<double> train_loss;    // mean loss per epoch
  std::vector<double> dev_accuracy;  // per epoch; empty without a dev set
  int stopped_epoch = 0;
  int best_epoch = 0;  // epoch whose parameters were kept (0 = initial)

  nlohmann::ordered_json to_json() const;
};

struct FinetuneHooks {
  // Replaces dev-set accuracy when set; called after every epoch with the
  // current model and the 1-based epoch number.
  std::function<double(const PairClassifier&, int)> dev_metric;
  std::function<void(const PairClassifier&, int, double)> on_epoch;
};

struct FinetuneResult {
  PairClassifier model;
  TrainReport report;
};

// Mini-batch SGD on cross-entropy over shuffled batches. With epochs set it
// runs exactly that many epochs; with patience it stops once dev accuracy has
// not improved for `patience` consecutive epochs and restores the best-dev
// parameters.
FinetuneResult finetune(PairClassifier model, std::span<const LabeledPair> train,
                        std::optional<std::span<const LabeledPair>> dev,
                        const TrainConfig& cfg, const FinetuneHooks& hooks = {});

struct DoubleFinetuneResult {
  PairClassifier model;
  TrainReport intermediate;
  TrainReport final;
};

// Trains on the intermediate task, then keeps training the same parameters
// on the final task.
DoubleFinetuneResult double_finetune(
    PairClassifier base, std::span<const LabeledPair> intermediate,
    std::span<const LabeledPair> final_train,
    std::optional<std::span<const LabeledPair>> final_dev,
    const TrainConfig& cfg_mid, const TrainConfig& cfg_final);

// Fraction of pairs whose predicted label matches.
double evaluate_accuracy(const PairClassifier& model,
                         std::span<const LabeledPair> pairs,
                         std::size_t max_tokens);

}  // namespace medsim
