#include "medsim/classifier.hpp"

#include <bit>
#include <cmath>
#include <cstdio>

#include "medsim/error.hpp"
#include "medsim/random.hpp"

namespace medsim {

PairClassifier::PairClassifier(std::unique_ptr<PairEncoder> encoder,
                               std::uint64_t head_seed)
    : encoder_(std::move(encoder)) {
  if (!encoder_) throw ValidationError("classifier needs an encoder");
  const auto width = static_cast<Eigen::Index>(encoder_->width());
  Rng rng(head_seed);
  head_weight_.name = "head.weight";
  head_weight_.value.resize(2, width);
  double limit = std::sqrt(6.0 / static_cast<double>(width + 2));
  for (Eigen::Index c = 0; c < width; ++c) {
    for (Eigen::Index r = 0; r < 2; ++r) {
      head_weight_.value(r, c) = (2.0 * uniform_unit(rng) - 1.0) * limit;
    }
  }
  head_bias_.name = "head.bias";
  head_bias_.value = Eigen::MatrixXd::Zero(2, 1);
}

PairClassifier::PairClassifier(const PairClassifier& other)
    : encoder_(other.encoder_->clone()),
      head_weight_(other.head_weight_),
      head_bias_(other.head_bias_),
      threshold_(other.threshold_),
      max_tokens_(other.max_tokens_) {}

PairClassifier& PairClassifier::operator=(const PairClassifier& other) {
  if (this != &other) {
    PairClassifier copy(other);
    *this = std::move(copy);
  }
  return *this;
}

void PairClassifier::set_threshold(double t) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw ValidationError("decision threshold must be in [0, 1]");
  }
  threshold_ = t;
}

void PairClassifier::set_max_tokens(std::size_t n) {
  if (n < 2) throw ValidationError("max_tokens must be >= 2");
  max_tokens_ = n;
}

Eigen::Vector2d PairClassifier::logits(const PairTokens& tokens) const {
  Eigen::VectorXd features = encoder_->encode(tokens);
  return head_weight_.value * features + head_bias_.value.col(0);
}

namespace {
Eigen::Vector2d softmax2(const Eigen::Vector2d& z) {
  double m = z.maxCoeff();
  Eigen::Vector2d e = (z.array() - m).exp();
  return e / e.sum();
}
}  // namespace

Eigen::Vector2d PairClassifier::probabilities(const PairTokens& tokens) const {
  return softmax2(logits(tokens));
}

Prediction PairClassifier::predict(std::string_view a, std::string_view b,
                                   std::size_t max_tokens) const {
  Eigen::Vector2d p = probabilities(prepare(a, b, max_tokens));
  Prediction out;
  out.p_positive = p(1);
  out.label = out.p_positive >= threshold_ ? 1 : 0;
  return out;
}

std::string PairClassifier::version() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const Eigen::MatrixXd& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      auto bits = std::bit_cast<std::uint64_t>(m.data()[i]);
      for (int b = 0; b < 8; ++b) {
        h ^= (bits >> (8 * b)) & 0xFF;
        h *= 1099511628211ULL;
      }
    }
  };
  for (const auto* p : parameters()) mix(p->value);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return encoder_->kind() + "-" + buf;
}

double PairClassifier::loss_and_gradient(const PairTokens& tokens, int label,
                                         Gradients& grads) const {
  std::unique_ptr<EncoderTape> tape;
  Eigen::VectorXd features = encoder_->forward(tokens, tape);
  Eigen::Vector2d z = head_weight_.value * features + head_bias_.value.col(0);
  // log-sum-exp keeps the loss finite for confident logits
  double m = z.maxCoeff();
  double lse = m + std::log((z.array() - m).exp().sum());
  double loss = lse - z(label);
  Eigen::Vector2d p = (z.array() - lse).exp();
  Eigen::Vector2d dz = p;
  dz(label) -= 1.0;

  const std::size_t nenc = encoder_->parameters().size();
  grads[nenc].noalias() += dz * features.transpose();
  grads[nenc + 1].col(0) += dz;
  Eigen::VectorXd dfeatures = head_weight_.value.transpose() * dz;
  encoder_->backward(*tape, dfeatures, grads);
  return loss;
}

std::vector<NamedTensor*> PairClassifier::parameters() {
  std::vector<NamedTensor*> out;
  for (auto& p : encoder_->parameters()) out.push_back(&p);
  out.push_back(&head_weight_);
  out.push_back(&head_bias_);
  return out;
}

std::vector<const NamedTensor*> PairClassifier::parameters() const {
  std::vector<const NamedTensor*> out;
  for (const auto& p : encoder_->parameters()) out.push_back(&p);
  out.push_back(&head_weight_);
  out.push_back(&head_bias_);
  return out;
}

Gradients PairClassifier::zero_gradients() const {
  Gradients g;
  for (const auto* p : parameters()) {
    g.push_back(Eigen::MatrixXd::Zero(p->value.rows(), p->value.cols()));
  }
  return g;
}

Prediction predict(const PairClassifier& model,
                   std::pair<std::string_view, std::string_view> pair,
                   std::size_t max_tokens) {
  return model.predict(pair.first, pair.second, max_tokens);
}

double mean_loss(const PairClassifier& model, std::span<const LabeledPair> pairs,
                 std::size_t max_tokens) {
  if (pairs.empty()) return 0.0;
  double total = 0.0;
  for (const auto& p : pairs) {
    Eigen::Vector2d z = model.logits(model.prepare(p.text_a, p.text_b, max_tokens));
    double m = z.maxCoeff();
    total += m + std::log((z.array() - m).exp().sum()) - z(p.label);
  }
  return total / static_cast<double>(pairs.size());
}

}  // namespace medsim
