#include "medsim/attention_encoder.hpp"

#include <cmath>

#include "medsim/error.hpp"
#include "medsim/random.hpp"

namespace medsim {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kGeluC = 0.7978845608028654;  // sqrt(2 / pi)
constexpr double kGeluA = 0.044715;
constexpr double kNormEps = 1e-5;

double gelu(double x) {
  return 0.5 * x * (1.0 + std::tanh(kGeluC * (x + kGeluA * x * x * x)));
}

double gelu_grad(double x) {
  double t = std::tanh(kGeluC * (x + kGeluA * x * x * x));
  return 0.5 * (1.0 + t) +
         0.5 * x * (1.0 - t * t) * kGeluC * (1.0 + 3.0 * kGeluA * x * x);
}

MatrixXd uniform_matrix(Eigen::Index rows, Eigen::Index cols, double limit,
                        Rng& rng) {
  MatrixXd m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) {
      m(r, c) = (2.0 * uniform_unit(rng) - 1.0) * limit;
    }
  }
  return m;
}

double xavier(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

double position_value(std::size_t pos, std::size_t dim, std::size_t width) {
  double rate = std::pow(10000.0, static_cast<double>(2 * (dim / 2)) /
                                      static_cast<double>(width));
  double angle = static_cast<double>(pos) / rate;
  return dim % 2 == 0 ? std::sin(angle) : std::cos(angle);
}

void softmax_rows(MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    double mx = m.row(r).maxCoeff();
    m.row(r) = (m.row(r).array() - mx).exp();
    m.row(r) /= m.row(r).sum();
  }
}

// Row-wise layer norm with learned gain and bias (both 1 x d).
struct NormTape {
  MatrixXd normalized;
  VectorXd inv_sigma;
};

MatrixXd layer_norm(const MatrixXd& x, const MatrixXd& gain, const MatrixXd& bias,
                    NormTape* tape) {
  const auto d = static_cast<double>(x.cols());
  MatrixXd xhat(x.rows(), x.cols());
  VectorXd inv(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    double mu = x.row(r).sum() / d;
    auto centered = x.row(r).array() - mu;
    double var = centered.square().sum() / d;
    inv(r) = 1.0 / std::sqrt(var + kNormEps);
    xhat.row(r) = centered * inv(r);
  }
  MatrixXd out = xhat.array().rowwise() * gain.row(0).array();
  out.rowwise() += bias.row(0);
  if (tape) {
    tape->normalized = std::move(xhat);
    tape->inv_sigma = std::move(inv);
  }
  return out;
}

MatrixXd layer_norm_backward(const MatrixXd& dout, const NormTape& tape,
                             const MatrixXd& gain, MatrixXd& dgain,
                             MatrixXd& dbias) {
  dgain += dout.cwiseProduct(tape.normalized).colwise().sum();
  dbias += dout.colwise().sum();
  MatrixXd dxhat = dout.array().rowwise() * gain.row(0).array();
  const auto d = static_cast<double>(dout.cols());
  MatrixXd dx(dout.rows(), dout.cols());
  for (Eigen::Index r = 0; r < dout.rows(); ++r) {
    double mean_d = dxhat.row(r).sum() / d;
    double mean_dx = dxhat.row(r).dot(tape.normalized.row(r)) / d;
    dx.row(r) = (dxhat.row(r).array() - mean_d -
                 tape.normalized.row(r).array() * mean_dx) *
                tape.inv_sigma(r);
  }
  return dx;
}

struct LayerTape {
  NormTape norm1;
  MatrixXd h1;  // normalized attention input
  MatrixXd q, k, v, attn, heads;
  NormTape norm2;
  MatrixXd h2;  // normalized feed-forward input
  MatrixXd pre_ff, ff;
};

struct AttentionTape final : EncoderTape {
  PairTokens tokens;
  std::vector<LayerTape> layers;
  NormTape final_norm;
  VectorXd u, v;
};

}  // namespace

AttentionEncoder::AttentionEncoder(Vocabulary vocab, AttentionEncoderConfig cfg)
    : vocab_(std::move(vocab)), cfg_(cfg) {
  if (cfg_.model_width < 2 || cfg_.ff_width == 0) {
    throw ValidationError("encoder widths must be positive (model_width >= 2)");
  }
  const auto d = static_cast<Eigen::Index>(cfg_.model_width);
  const auto f = static_cast<Eigen::Index>(cfg_.ff_width);
  const double s = cfg_.init_scale;
  Rng rng(cfg_.init_seed);

  auto add = [&](std::string name, MatrixXd value) {
    params_.push_back({std::move(name), std::move(value)});
    return params_.size() - 1;
  };
  embed_slot_ = add("embedding",
                    uniform_matrix(static_cast<Eigen::Index>(vocab_.size()), d,
                                   s, rng));
  segment_slot_ = add("segment", uniform_matrix(2, d, 0.1 * s, rng));
  for (std::size_t l = 0; l < cfg_.layers; ++l) {
    std::string p = "layer" + std::to_string(l) + ".";
    double attn = xavier(cfg_.model_width, cfg_.model_width);
    double ff = xavier(cfg_.model_width, cfg_.ff_width);
    LayerSlots slots{};
    slots.ln1_gain = add(p + "ln1.gain", MatrixXd::Ones(1, d));
    slots.ln1_bias = add(p + "ln1.bias", MatrixXd::Zero(1, d));
    slots.wq = add(p + "wq", uniform_matrix(d, d, attn, rng));
    slots.wk = add(p + "wk", uniform_matrix(d, d, attn, rng));
    slots.wv = add(p + "wv", uniform_matrix(d, d, attn, rng));
    slots.wo = add(p + "wo", uniform_matrix(d, d, 0.5 * attn, rng));
    slots.ln2_gain = add(p + "ln2.gain", MatrixXd::Ones(1, d));
    slots.ln2_bias = add(p + "ln2.bias", MatrixXd::Zero(1, d));
    slots.w1 = add(p + "w1", uniform_matrix(d, f, ff, rng));
    slots.b1 = add(p + "b1", MatrixXd::Zero(1, f));
    slots.w2 = add(p + "w2", uniform_matrix(f, d, 0.5 * ff, rng));
    slots.b2 = add(p + "b2", MatrixXd::Zero(1, d));
    layers_.push_back(slots);
  }
  final_gain_slot_ = add("final_norm.gain", MatrixXd::Ones(1, d));
  final_bias_slot_ = add("final_norm.bias", MatrixXd::Zero(1, d));
}

std::unique_ptr<AttentionEncoder> AttentionEncoder::from_hyperparameters(
    Vocabulary vocab, const nlohmann::json& hp) {
  AttentionEncoderConfig cfg;
  cfg.model_width = hp.at("model_width").get<std::size_t>();
  cfg.ff_width = hp.at("ff_width").get<std::size_t>();
  cfg.layers = hp.at("layers").get<std::size_t>();
  cfg.position_scale = hp.at("position_scale").get<double>();
  cfg.init_scale = hp.value("init_scale", cfg.init_scale);
  cfg.init_seed = hp.value("init_seed", cfg.init_seed);
  return std::make_unique<AttentionEncoder>(std::move(vocab), cfg);
}

nlohmann::json AttentionEncoder::hyperparameters() const {
  return {{"model_width", cfg_.model_width},
          {"ff_width", cfg_.ff_width},
          {"layers", cfg_.layers},
          {"position_scale", cfg_.position_scale},
          {"init_scale", cfg_.init_scale},
          {"init_seed", cfg_.init_seed}};
}

std::unique_ptr<PairEncoder> AttentionEncoder::clone() const {
  return std::make_unique<AttentionEncoder>(*this);
}

Eigen::VectorXd AttentionEncoder::encode(const PairTokens& tokens) const {
  return run(tokens, nullptr);
}

Eigen::VectorXd AttentionEncoder::forward(
    const PairTokens& tokens, std::unique_ptr<EncoderTape>& tape) const {
  auto t = std::make_unique<AttentionTape>();
  auto* raw = t.get();
  tape = std::move(t);
  return run(tokens, raw);
}

Eigen::VectorXd AttentionEncoder::run(const PairTokens& tokens,
                                      EncoderTape* tape_base) const {
  const std::size_t n = tokens.ids.size();
  if (tokens.len_a == 0 || tokens.len_a >= n) {
    throw ValidationError("pair tokens need two non-empty segments");
  }
  auto* tape = static_cast<AttentionTape*>(tape_base);
  const auto d = static_cast<Eigen::Index>(cfg_.model_width);
  const auto rows = static_cast<Eigen::Index>(n);
  const MatrixXd& embed = params_[embed_slot_].value;
  const MatrixXd& segment = params_[segment_slot_].value;

  MatrixXd x(rows, d);
  for (std::size_t i = 0; i < n; ++i) {
    int id = tokens.ids[i];
    if (id < 0 || static_cast<std::size_t>(id) >= vocab_.size()) {
      throw ValidationError("token id out of vocabulary range");
    }
    const auto r = static_cast<Eigen::Index>(i);
    x.row(r) = embed.row(id) + segment.row(i < tokens.len_a ? 0 : 1);
    // Positions restart at each segment.
    std::size_t pos = i < tokens.len_a ? i : i - tokens.len_a;
    for (Eigen::Index c = 0; c < d; ++c) {
      x(r, c) += cfg_.position_scale *
                 position_value(pos, static_cast<std::size_t>(c), cfg_.model_width);
    }
  }

  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  if (tape) {
    tape->tokens = tokens;
    tape->layers.assign(layers_.size(), LayerTape{});
  }
  for (std::size_t li = 0; li < layers_.size(); ++li) {
    const auto& slots = layers_[li];
    LayerTape* lt = tape ? &tape->layers[li] : nullptr;

    MatrixXd h1 = layer_norm(x, params_[slots.ln1_gain].value,
                             params_[slots.ln1_bias].value, lt ? &lt->norm1 : nullptr);
    MatrixXd q = h1 * params_[slots.wq].value;
    MatrixXd k = h1 * params_[slots.wk].value;
    MatrixXd v = h1 * params_[slots.wv].value;
    MatrixXd attn = (q * k.transpose()) * scale;
    softmax_rows(attn);
    MatrixXd heads = attn * v;
    MatrixXd y = x + heads * params_[slots.wo].value;

    MatrixXd h2 = layer_norm(y, params_[slots.ln2_gain].value,
                             params_[slots.ln2_bias].value, lt ? &lt->norm2 : nullptr);
    MatrixXd pre_ff = h2 * params_[slots.w1].value;
    pre_ff.rowwise() += params_[slots.b1].value.row(0);
    MatrixXd ff = pre_ff.unaryExpr(&gelu);
    x = y + ff * params_[slots.w2].value;
    x.rowwise() += params_[slots.b2].value.row(0);

    if (lt) {
      lt->h1 = std::move(h1);
      lt->q = std::move(q);
      lt->k = std::move(k);
      lt->v = std::move(v);
      lt->attn = std::move(attn);
      lt->heads = std::move(heads);
      lt->h2 = std::move(h2);
      lt->pre_ff = std::move(pre_ff);
      lt->ff = std::move(ff);
    }
  }

  MatrixXd out = layer_norm(x, params_[final_gain_slot_].value,
                            params_[final_bias_slot_].value,
                            tape ? &tape->final_norm : nullptr);
  const auto na = static_cast<Eigen::Index>(tokens.len_a);
  const auto nb = rows - na;
  VectorXd u = out.topRows(na).colwise().mean().transpose();
  VectorXd w = out.bottomRows(nb).colwise().mean().transpose();
  VectorXd features(2 * d);
  features.head(d) = u.cwiseProduct(w);
  features.tail(d) = (u - w).array().square().matrix();
  if (tape) {
    tape->u = std::move(u);
    tape->v = std::move(w);
  }
  return features;
}

void AttentionEncoder::backward(const EncoderTape& tape_base,
                                const Eigen::VectorXd& grad_out,
                                Gradients& grads) const {
  const auto& tape = static_cast<const AttentionTape&>(tape_base);
  const auto d = static_cast<Eigen::Index>(cfg_.model_width);
  const auto n = static_cast<Eigen::Index>(tape.tokens.ids.size());
  const auto na = static_cast<Eigen::Index>(tape.tokens.len_a);
  const auto nb = n - na;

  VectorXd g_prod = grad_out.head(d);
  VectorXd g_sq = grad_out.tail(d);
  VectorXd diff2 = 2.0 * (tape.u - tape.v);
  VectorXd du = g_prod.cwiseProduct(tape.v) + g_sq.cwiseProduct(diff2);
  VectorXd dv = g_prod.cwiseProduct(tape.u) - g_sq.cwiseProduct(diff2);

  MatrixXd dout(n, d);
  dout.topRows(na).rowwise() = (du / static_cast<double>(na)).transpose();
  dout.bottomRows(nb).rowwise() = (dv / static_cast<double>(nb)).transpose();
  MatrixXd dx = layer_norm_backward(dout, tape.final_norm,
                                    params_[final_gain_slot_].value,
                                    grads[final_gain_slot_], grads[final_bias_slot_]);

  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  for (std::size_t li = layers_.size(); li-- > 0;) {
    const auto& slots = layers_[li];
    const auto& lt = tape.layers[li];

    // Feed-forward block: x_next = y + gelu(LN2(y) W1 + b1) W2 + b2.
    MatrixXd dy = dx;
    grads[slots.w2].noalias() += lt.ff.transpose() * dx;
    grads[slots.b2] += dx.colwise().sum();
    MatrixXd dpre = (dx * params_[slots.w2].value.transpose())
                        .cwiseProduct(lt.pre_ff.unaryExpr(&gelu_grad));
    grads[slots.w1].noalias() += lt.h2.transpose() * dpre;
    grads[slots.b1] += dpre.colwise().sum();
    MatrixXd dh2 = dpre * params_[slots.w1].value.transpose();
    dy += layer_norm_backward(dh2, lt.norm2, params_[slots.ln2_gain].value,
                              grads[slots.ln2_gain], grads[slots.ln2_bias]);

    // Attention block: y = x + softmax(QK^T / sqrt(d)) V Wo over LN1(x).
    grads[slots.wo].noalias() += lt.heads.transpose() * dy;
    MatrixXd dheads = dy * params_[slots.wo].value.transpose();
    MatrixXd dattn = dheads * lt.v.transpose();
    MatrixXd dv_mat = lt.attn.transpose() * dheads;
    VectorXd row_dot = dattn.cwiseProduct(lt.attn).rowwise().sum();
    MatrixXd dscores = lt.attn.cwiseProduct(dattn.colwise() - row_dot) * scale;
    MatrixXd dq = dscores * lt.k;
    MatrixXd dk = dscores.transpose() * lt.q;
    grads[slots.wq].noalias() += lt.h1.transpose() * dq;
    grads[slots.wk].noalias() += lt.h1.transpose() * dk;
    grads[slots.wv].noalias() += lt.h1.transpose() * dv_mat;
    MatrixXd dh1 = dq * params_[slots.wq].value.transpose();
    dh1.noalias() += dk * params_[slots.wk].value.transpose();
    dh1.noalias() += dv_mat * params_[slots.wv].value.transpose();
    dx = dy + layer_norm_backward(dh1, lt.norm1, params_[slots.ln1_gain].value,
                                  grads[slots.ln1_gain], grads[slots.ln1_bias]);
  }

  MatrixXd& g_embed = grads[embed_slot_];
  MatrixXd& g_segment = grads[segment_slot_];
  for (Eigen::Index i = 0; i < n; ++i) {
    g_embed.row(tape.tokens.ids[static_cast<std::size_t>(i)]) += dx.row(i);
    g_segment.row(i < na ? 0 : 1) += dx.row(i);
  }
}

}  // namespace medsim
