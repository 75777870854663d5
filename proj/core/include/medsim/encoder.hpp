#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "medsim/vocabulary.hpp"

namespace medsim {

struct NamedTensor {
  std::string name;
  Eigen::MatrixXd value;
};

// One gradient matrix per parameter tensor, same order and shapes.
using Gradients = std::vector<Eigen::MatrixXd>;

Gradients zeros_like(const std::vector<NamedTensor>& params);

// Token ids of both segments after truncation. Segment a occupies
// ids[0, len_a), segment b the rest. Both segments are non-empty.
struct PairTokens {
  std::vector<int> ids;
  std::size_t len_a = 0;

  std::size_t len_b() const { return ids.size() - len_a; }
};

// Removes tokens from the end of the longer segment (segment a on ties)
// until the joint length is at most max_tokens.
void truncate_pair(std::vector<int>& a, std::vector<int>& b,
                   std::size_t max_tokens);

// Activations kept by forward() for backward().
class EncoderTape {
 public:
  virtual ~EncoderTape() = default;
};

// Maps a question pair to a fixed-width feature vector. Implementations own
// their parameters and vocabulary.
class PairEncoder {
 public:
  virtual ~PairEncoder() = default;

  virtual std::string kind() const = 0;
  virtual nlohmann::json hyperparameters() const = 0;
  virtual std::size_t width() const = 0;
  virtual const Vocabulary& vocabulary() const = 0;

  // Tokenizes, maps to ids and truncates. Throws ValidationError if either
  // text is empty after trimming. A text with no word characters becomes a
  // single [UNK].
  PairTokens prepare(std::string_view text_a, std::string_view text_b,
                     std::size_t max_tokens) const;

  virtual Eigen::VectorXd encode(const PairTokens& tokens) const = 0;
  virtual Eigen::VectorXd forward(const PairTokens& tokens,
                                  std::unique_ptr<EncoderTape>& tape) const = 0;
  // Accumulates d(loss)/d(params) into grads given d(loss)/d(output).
  virtual void backward(const EncoderTape& tape, const Eigen::VectorXd& grad_out,
                        Gradients& grads) const = 0;

  virtual std::vector<NamedTensor>& parameters() = 0;
  virtual const std::vector<NamedTensor>& parameters() const = 0;

  virtual std::unique_ptr<PairEncoder> clone() const = 0;
};

}  // namespace medsim
