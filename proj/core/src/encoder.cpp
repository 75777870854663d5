#include "medsim/encoder.hpp"

#include "medsim/error.hpp"
#include "medsim/text.hpp"

namespace medsim {

Gradients zeros_like(const std::vector<NamedTensor>& params) {
  Gradients g;
  g.reserve(params.size());
  for (const auto& p : params) {
    g.push_back(Eigen::MatrixXd::Zero(p.value.rows(), p.value.cols()));
  }
  return g;
}

void truncate_pair(std::vector<int>& a, std::vector<int>& b,
                   std::size_t max_tokens) {
  while (a.size() + b.size() > max_tokens) {
    if (a.size() >= b.size()) {
      a.pop_back();
    } else {
      b.pop_back();
    }
  }
}

PairTokens PairEncoder::prepare(std::string_view text_a,
                                std::string_view text_b,
                                std::size_t max_tokens) const {
  if (max_tokens < 2) throw ValidationError("max_tokens must be >= 2");
  if (text::trim(text_a).empty()) throw ValidationError("text_a is empty");
  if (text::trim(text_b).empty()) throw ValidationError("text_b is empty");
  std::vector<int> a = vocabulary().ids(text_a);
  std::vector<int> b = vocabulary().ids(text_b);
  if (a.empty()) a.push_back(Vocabulary::kUnknown);
  if (b.empty()) b.push_back(Vocabulary::kUnknown);
  truncate_pair(a, b, max_tokens);
  PairTokens out;
  out.len_a = a.size();
  out.ids = std::move(a);
  out.ids.insert(out.ids.end(), b.begin(), b.end());
  return out;
}

}  // namespace medsim
