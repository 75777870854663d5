#include "medsim/training.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "medsim/error.hpp"
#include "medsim/eval.hpp"
#include "medsim/random.hpp"

namespace medsim {

void TrainConfig::validate() const {
  if (max_tokens < 2) throw ValidationError("max_tokens must be >= 2");
  if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ValidationError("learning_rate must be positive");
  }
  if (epochs.has_value() == early_stop_patience.has_value()) {
    throw ValidationError(
        "exactly one of epochs / early_stop_patience must be set");
  }
  if (epochs && *epochs < 0) throw ValidationError("epochs must be >= 0");
  if (early_stop_patience && *early_stop_patience < 1) {
    throw ValidationError("early_stop_patience must be >= 1");
  }
  if (max_epochs < 1) throw ValidationError("max_epochs must be >= 1");
  if (!(clip_norm >= 0.0)) throw ValidationError("clip_norm must be >= 0");
}

nlohmann::ordered_json TrainConfig::to_json() const {
  nlohmann::ordered_json j;
  j["max_tokens"] = max_tokens;
  j["learning_rate"] = learning_rate;
  j["batch_size"] = batch_size;
  j["epochs"] = epochs ? nlohmann::ordered_json(*epochs) : nlohmann::ordered_json();
  j["early_stop_patience"] =
      early_stop_patience ? nlohmann::ordered_json(*early_stop_patience)
                          : nlohmann::ordered_json();
  j["max_epochs"] = max_epochs;
  j["clip_norm"] = clip_norm;
  j["rng_seed"] = rng_seed;
  return j;
}

nlohmann::ordered_json TrainReport::to_json() const {
  nlohmann::ordered_json j;
  j["train_loss"] = train_loss;
  j["dev_accuracy"] = dev_accuracy;
  j["stopped_epoch"] = stopped_epoch;
  j["best_epoch"] = best_epoch;
  return j;
}

double evaluate_accuracy(const PairClassifier& model,
                         std::span<const LabeledPair> pairs,
                         std::size_t max_tokens) {
  std::vector<int> preds;
  std::vector<int> labels;
  preds.reserve(pairs.size());
  labels.reserve(pairs.size());
  for (const auto& p : pairs) {
    preds.push_back(model.predict(p.text_a, p.text_b, max_tokens).label);
    labels.push_back(p.label);
  }
  return accuracy(preds, labels);
}

namespace {

std::vector<NamedTensor> snapshot(const PairClassifier& model) {
  std::vector<NamedTensor> out;
  for (const auto* p : model.parameters()) out.push_back(*p);
  return out;
}

void restore(PairClassifier& model, const std::vector<NamedTensor>& saved) {
  auto params = model.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = saved[i].value;
}

}  // namespace

FinetuneResult finetune(PairClassifier model, std::span<const LabeledPair> train,
                        std::optional<std::span<const LabeledPair>> dev,
                        const TrainConfig& cfg, const FinetuneHooks& hooks) {
  cfg.validate();
  if (train.empty()) throw ValidationError("finetune: empty training set");
  const bool early_stop = cfg.early_stop_patience.has_value();
  if (early_stop && !dev && !hooks.dev_metric) {
    throw ValidationError("finetune: early stopping needs a dev set");
  }
  if (dev && dev->empty() && !hooks.dev_metric) {
    throw ValidationError("finetune: dev set is empty");
  }

  std::vector<PairTokens> tokens;
  tokens.reserve(train.size());
  for (const auto& p : train) {
    tokens.push_back(model.prepare(p.text_a, p.text_b, cfg.max_tokens));
  }

  TrainReport report;
  const int limit = early_stop ? cfg.max_epochs : *cfg.epochs;
  const bool track_dev = dev.has_value() || static_cast<bool>(hooks.dev_metric);

  Rng rng(cfg.rng_seed);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  double best_dev = -1.0;
  int since_best = 0;
  std::vector<NamedTensor> best_params;
  if (early_stop) best_params = snapshot(model);

  auto params = model.parameters();
  for (int epoch = 1; epoch <= limit; ++epoch) {
    shuffle_in_place(order, rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      std::size_t end = std::min(order.size(), start + cfg.batch_size);
      Gradients grads = model.zero_gradients();
      double batch_loss = 0.0;
      for (std::size_t i = start; i < end; ++i) {
        std::size_t idx = order[i];
        batch_loss += model.loss_and_gradient(tokens[idx], train[idx].label, grads);
      }
      if (!std::isfinite(batch_loss)) {
        std::ostringstream msg;
        msg << "non-finite loss at epoch " << epoch << ", batch starting at "
            << start << " (lr=" << cfg.learning_rate
            << ", batch_size=" << cfg.batch_size << ")";
        throw RuntimeFailure(msg.str());
      }
      epoch_loss += batch_loss;
      double step = cfg.learning_rate / static_cast<double>(end - start);
      if (cfg.clip_norm > 0.0) {
        double sq = 0.0;
        for (const auto& g : grads) sq += g.squaredNorm();
        const double norm = std::sqrt(sq) / static_cast<double>(end - start);
        if (norm > cfg.clip_norm) step *= cfg.clip_norm / norm;
      }
      for (std::size_t k = 0; k < params.size(); ++k) {
        params[k]->value.noalias() -= step * grads[k];
      }
    }
    const double mean = epoch_loss / static_cast<double>(train.size());
    report.train_loss.push_back(mean);
    report.stopped_epoch = epoch;

    if (track_dev) {
      double acc = hooks.dev_metric
                       ? hooks.dev_metric(model, epoch)
                       : evaluate_accuracy(model, *dev, cfg.max_tokens);
      report.dev_accuracy.push_back(acc);
      if (acc > best_dev) {
        best_dev = acc;
        since_best = 0;
        report.best_epoch = epoch;
        if (early_stop) best_params = snapshot(model);
      } else {
        ++since_best;
      }
    } else {
      report.best_epoch = epoch;
    }
    if (hooks.on_epoch) hooks.on_epoch(model, epoch, mean);
    if (early_stop && since_best >= *cfg.early_stop_patience) break;
  }

  if (early_stop) {
    restore(model, best_params);
  } else {
    // Fixed-epoch runs keep the last parameters.
    report.best_epoch = report.stopped_epoch;
  }
  return {std::move(model), std::move(report)};
}

DoubleFinetuneResult double_finetune(
    PairClassifier base, std::span<const LabeledPair> intermediate,
    std::span<const LabeledPair> final_train,
    std::optional<std::span<const LabeledPair>> final_dev,
    const TrainConfig& cfg_mid, const TrainConfig& cfg_final) {
  if (intermediate.empty()) {
    throw ValidationError("double_finetune: intermediate set is empty");
  }
  if (!cfg_mid.epochs) {
    throw ValidationError(
        "double_finetune: the intermediate stage runs a fixed number of epochs");
  }
  auto mid = finetune(std::move(base), intermediate, std::nullopt, cfg_mid);
  auto fin = finetune(std::move(mid.model), final_train, final_dev, cfg_final);
  return {std::move(fin.model), std::move(mid.report), std::move(fin.report)};
}

}  // namespace medsim
