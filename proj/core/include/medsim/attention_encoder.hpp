#pragma once

#include <cstdint>

#include "medsim/encoder.hpp"

namespace medsim {

struct AttentionEncoderConfig {
  std::size_t model_width = 16;
  std::size_t ff_width = 32;
  std::size_t layers = 2;
  double position_scale = 0.1;
  double init_scale = 0.5;
  std::uint64_t init_seed = 0;
};

// Desk-scale transformer: token + segment embeddings and fixed sinusoidal
// positions feed pre-norm single-head self-attention blocks over the joined
// pair. After a final layer norm each segment is mean-pooled to u and v, and
// the output is [u*v, (u-v)^2], so the width is 2 * model_width.
class AttentionEncoder final : public PairEncoder {
 public:
  AttentionEncoder(Vocabulary vocab, AttentionEncoderConfig cfg);

  static std::unique_ptr<AttentionEncoder> from_hyperparameters(
      Vocabulary vocab, const nlohmann::json& hp);

  std::string kind() const override { return "attention"; }
  nlohmann::json hyperparameters() const override;
  std::size_t width() const override { return 2 * cfg_.model_width; }
  const Vocabulary& vocabulary() const override { return vocab_; }
  const AttentionEncoderConfig& config() const { return cfg_; }

  Eigen::VectorXd encode(const PairTokens& tokens) const override;
  Eigen::VectorXd forward(const PairTokens& tokens,
                          std::unique_ptr<EncoderTape>& tape) const override;
  void backward(const EncoderTape& tape, const Eigen::VectorXd& grad_out,
                Gradients& grads) const override;

  std::vector<NamedTensor>& parameters() override { return params_; }
  const std::vector<NamedTensor>& parameters() const override { return params_; }

  std::unique_ptr<PairEncoder> clone() const override;

 private:
  struct LayerSlots {
    std::size_t ln1_gain, ln1_bias, wq, wk, wv, wo;
    std::size_t ln2_gain, ln2_bias, w1, b1, w2, b2;
  };

  Eigen::VectorXd run(const PairTokens& tokens, EncoderTape* tape) const;

  Vocabulary vocab_;
  AttentionEncoderConfig cfg_;
  std::vector<NamedTensor> params_;
  std::size_t embed_slot_ = 0;
  std::size_t segment_slot_ = 0;
  std::size_t final_gain_slot_ = 0;
  std::size_t final_bias_slot_ = 0;
  std::vector<LayerSlots> layers_;
};

}  // namespace medsim
