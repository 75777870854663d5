#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "medsim/corpus.hpp"
#include "medsim/encoder.hpp"

namespace medsim {

// Anything that can put a similarity probability on a question pair. The
// classifier implements it; tests and the service also use simple stubs.
// score() must be safe to call concurrently.
class PairScorer {
 public:
  virtual ~PairScorer() = default;
  // Probability that the pair is similar, in [0, 1].
  virtual double score(std::string_view text_a, std::string_view text_b) const = 0;
  virtual std::string version() const { return "unversioned"; }
};

struct Prediction {
  int label = 0;
  double p_positive = 0.0;
};

// Encoder followed by an affine head producing two logits (different,
// similar). Copying deep-copies the encoder.
class PairClassifier final : public PairScorer {
 public:
  static constexpr double kDefaultThreshold = 0.5;
  static constexpr std::size_t kDefaultMaxTokens = 200;

  PairClassifier(std::unique_ptr<PairEncoder> encoder, std::uint64_t head_seed);
  PairClassifier(const PairClassifier& other);
  PairClassifier& operator=(const PairClassifier& other);
  PairClassifier(PairClassifier&&) noexcept = default;
  PairClassifier& operator=(PairClassifier&&) noexcept = default;

  const PairEncoder& encoder() const { return *encoder_; }
  PairEncoder& encoder() { return *encoder_; }

  double threshold() const { return threshold_; }
  void set_threshold(double t);
  std::size_t max_tokens() const { return max_tokens_; }
  void set_max_tokens(std::size_t n);

  PairTokens prepare(std::string_view a, std::string_view b,
                     std::size_t max_tokens) const {
    return encoder_->prepare(a, b, max_tokens);
  }

  Eigen::Vector2d logits(const PairTokens& tokens) const;
  // Softmax over the two logits: {p(different), p(similar)}.
  Eigen::Vector2d probabilities(const PairTokens& tokens) const;

  Prediction predict(std::string_view a, std::string_view b,
                     std::size_t max_tokens) const;
  Prediction predict(std::string_view a, std::string_view b) const {
    return predict(a, b, max_tokens_);
  }

  double score(std::string_view a, std::string_view b) const override {
    return predict(a, b).p_positive;
  }
  std::string version() const override;

  // Cross-entropy of one example; adds its gradient into grads.
  double loss_and_gradient(const PairTokens& tokens, int label,
                           Gradients& grads) const;

  // Encoder tensors followed by head.weight and head.bias.
  std::vector<NamedTensor*> parameters();
  std::vector<const NamedTensor*> parameters() const;
  Gradients zero_gradients() const;

 private:
  std::unique_ptr<PairEncoder> encoder_;
  NamedTensor head_weight_;  // 2 x width
  NamedTensor head_bias_;    // 2 x 1
  double threshold_ = kDefaultThreshold;
  std::size_t max_tokens_ = kDefaultMaxTokens;
};

Prediction predict(const PairClassifier& model,
                   std::pair<std::string_view, std::string_view> pair,
                   std::size_t max_tokens);

// Cross-entropy averaged over the pairs, no gradient.
double mean_loss(const PairClassifier& model, std::span<const LabeledPair> pairs,
                 std::size_t max_tokens);

}  // namespace medsim
