#include "medsim/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <sstream>
#include <thread>

#include "medsim/error.hpp"

namespace medsim {

double accuracy(std::span<const int> preds, std::span<const int> labels) {
  if (preds.size() != labels.size()) {
    throw ValidationError("accuracy: predictions and labels differ in length");
  }
  if (preds.empty()) throw ValidationError("accuracy: empty input");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) hits += preds[i] == labels[i];
  return static_cast<double>(hits) / static_cast<double>(preds.size());
}

std::vector<double> EvalReport::accuracies() const {
  std::vector<double> out;
  out.reserve(runs.size());
  for (const auto& r : runs) out.push_back(r.accuracy);
  return out;
}

nlohmann::ordered_json EvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["model_tag"] = model_tag;
  auto rs = nlohmann::ordered_json::array();
  for (const auto& r : runs) {
    nlohmann::ordered_json o;
    o["split_index"] = r.split_index;
    o["rng_seed"] = r.rng_seed;
    o["accuracy"] = r.accuracy;
    o["model_tag"] = r.model_tag;
    rs.push_back(std::move(o));
  }
  j["runs"] = std::move(rs);
  j["mean"] = mean;
  j["std"] = std;
  auto cs = nlohmann::ordered_json::array();
  for (const auto& c : comparisons) {
    nlohmann::ordered_json o;
    o["tag_a"] = c.tag_a;
    o["tag_b"] = c.tag_b;
    o["t_statistic"] = std::isfinite(c.t_statistic)
                           ? nlohmann::ordered_json(c.t_statistic)
                           : nlohmann::ordered_json(c.t_statistic > 0 ? "inf" : "-inf");
    o["p_value"] = c.p_value;
    o["df"] = c.df;
    o["degenerate"] = c.degenerate;
    cs.push_back(std::move(o));
  }
  j["comparisons"] = std::move(cs);
  return j;
}

EvalReport EvalReport::from_json(const nlohmann::json& j) {
  EvalReport r;
  r.model_tag = j.at("model_tag").get<std::string>();
  for (const auto& o : j.at("runs")) {
    r.runs.push_back({o.at("split_index").get<int>(),
                      o.at("rng_seed").get<std::uint64_t>(),
                      o.at("accuracy").get<double>(),
                      o.at("model_tag").get<std::string>()});
  }
  r.mean = j.at("mean").get<double>();
  r.std = j.at("std").get<double>();
  for (const auto& o : j.value("comparisons", nlohmann::json::array())) {
    Comparison c;
    c.tag_a = o.at("tag_a").get<std::string>();
    c.tag_b = o.at("tag_b").get<std::string>();
    const auto& t = o.at("t_statistic");
    c.t_statistic = t.is_string() ? (t == "inf" ? HUGE_VAL : -HUGE_VAL)
                                  : t.get<double>();
    c.p_value = o.at("p_value").get<double>();
    c.df = o.at("df").get<int>();
    c.degenerate = o.at("degenerate").get<bool>();
    r.comparisons.push_back(std::move(c));
  }
  return r;
}

void summarize(EvalReport& report) {
  auto acc = report.accuracies();
  if (acc.empty()) {
    report.mean = 0.0;
    report.std = 0.0;
    return;
  }
  report.mean = stats::mean(acc);
  report.std = stats::sample_std(acc);
}

EvalReport run_splits(const SplitTrainer& trainer,
                      std::span<const LabeledPair> pool,
                      std::span<const LabeledPair> test,
                      std::span<const std::uint64_t> seeds, std::size_t k,
                      const RunSplitsOptions& options) {
  if (k == 0) throw ValidationError("run_splits: k must be >= 1");
  if (seeds.size() != k) {
    throw ValidationError("run_splits: expected " + std::to_string(k) +
                          " seeds, got " + std::to_string(seeds.size()));
  }
  if (pool.empty()) throw ValidationError("run_splits: empty training pool");
  if (!trainer) throw ValidationError("run_splits: no trainer");

  std::vector<SplitData> splits(k);
  for (std::size_t i = 0; i < k; ++i) {
    PairSplit s = split_by_seed(pool, options.dev_fraction, 0.0, seeds[i]);
    splits[i].split_index = static_cast<int>(i);
    splits[i].seed = seeds[i];
    splits[i].train = std::move(s.train);
    splits[i].dev = std::move(s.dev);
    splits[i].test = test;
  }

  std::vector<double> acc(k, 0.0);
  std::vector<std::exception_ptr> errors(k);
  auto run_one = [&](std::size_t i) {
    try {
      acc[i] = trainer(splits[i]);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  if (options.parallel && k > 1) {
    std::vector<std::jthread> workers;
    for (std::size_t i = 0; i < k; ++i) workers.emplace_back(run_one, i);
  } else {
    for (std::size_t i = 0; i < k; ++i) run_one(i);
  }

  for (std::size_t i = 0; i < k; ++i) {
    if (!errors[i]) continue;
    std::string what = "unknown error";
    try {
      std::rethrow_exception(errors[i]);
    } catch (const std::exception& e) {
      what = e.what();
    } catch (...) {
    }
    throw RuntimeFailure("split " + std::to_string(i) + " failed: " + what);
  }

  EvalReport report;
  report.model_tag = options.model_tag;
  for (std::size_t i = 0; i < k; ++i) {
    if (!(acc[i] >= 0.0 && acc[i] <= 1.0)) {
      throw RuntimeFailure("split " + std::to_string(i) +
                           " returned accuracy outside [0, 1]");
    }
    report.runs.push_back({static_cast<int>(i), seeds[i], acc[i], options.model_tag});
  }
  summarize(report);
  return report;
}

Comparison compare(const EvalReport& a, const EvalReport& b,
                   stats::Alternative alt) {
  auto ra = a.runs;
  auto rb = b.runs;
  auto by_index = [](const SplitRun& x, const SplitRun& y) {
    return x.split_index < y.split_index;
  };
  std::sort(ra.begin(), ra.end(), by_index);
  std::sort(rb.begin(), rb.end(), by_index);
  if (ra.size() != rb.size()) {
    throw ValidationError("compare: reports have different numbers of splits");
  }
  std::vector<double> xa, xb;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    if (ra[i].split_index != rb[i].split_index) {
      throw ValidationError("compare: split indices do not line up");
    }
    xa.push_back(ra[i].accuracy);
    xb.push_back(rb[i].accuracy);
  }
  auto t = stats::paired_t_test(xa, xb, alt);
  return {a.model_tag, b.model_tag, t.t, t.p, t.df, t.degenerate};
}

std::string render_table(std::span<const EvalReport> reports,
                         std::string_view regime) {
  std::size_t tag_width = 5;
  for (const auto& r : reports) tag_width = std::max(tag_width, r.model_tag.size());
  std::size_t regime_width = std::max<std::size_t>(6, regime.size());

  std::ostringstream out;
  auto pad = [](std::string s, std::size_t w) {
    s.resize(std::max(w, s.size()), ' ');
    return s;
  };
  out << pad("model", tag_width) << "  " << pad("regime", regime_width)
      << "  accuracy (%)\n";
  out << std::string(tag_width + regime_width + 18, '-') << "\n";
  for (const auto& r : reports) {
    char cell[64];
    std::snprintf(cell, sizeof cell, "%.1f ± %.1f", 100.0 * r.mean, 100.0 * r.std);
    out << pad(r.model_tag, tag_width) << "  " << pad(std::string(regime), regime_width)
        << "  " << cell << "\n";
  }
  return out.str();
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::consistently_correct: return "consistently_correct";
    case Verdict::consistently_wrong: return "consistently_wrong";
    case Verdict::mixed: return "mixed";
  }
  return "mixed";
}

int consistency_quorum(int models) { return std::max(4, models / 2 + 1); }

Verdict verdict_for(int correct, int models) {
  const int quorum = consistency_quorum(models);
  if (correct >= quorum) return Verdict::consistently_correct;
  if (models - correct >= quorum) return Verdict::consistently_wrong;
  return Verdict::mixed;
}

ConsistencyResult consistency_analysis(std::span<const PairScorer* const> models,
                                       std::span<const LabeledPair> pairs,
                                       double threshold) {
  if (models.size() < 4) {
    throw ValidationError("consistency_analysis needs at least 4 models");
  }
  const int k = static_cast<int>(models.size());
  ConsistencyResult result;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& pair = pairs[i];
    std::string id = pair.id ? *pair.id : "pair-" + std::to_string(i);
    int correct = 0;
    bool failed = false;
    for (int m = 0; m < k; ++m) {
      try {
        double p = models[static_cast<std::size_t>(m)]->score(pair.text_a, pair.text_b);
        int label = p >= threshold ? 1 : 0;
        correct += label == pair.label;
      } catch (const std::exception& e) {
        result.diagnostics.push_back(id + ": model " + std::to_string(m) +
                                     " failed: " + e.what());
        failed = true;
        break;
      }
    }
    if (failed) {
      ++result.skipped;
      continue;
    }
    result.verdicts.push_back({id, verdict_for(correct, k), correct, k});
  }
  return result;
}

ProbeResult probe_with_edits(std::span<const PairScorer* const> models,
                             const LabeledPair& base_pair,
                             std::span<const std::string> edits,
                             double threshold) {
  if (edits.empty()) throw ValidationError("probe_with_edits: empty edit list");
  std::vector<LabeledPair> batch;
  batch.reserve(edits.size() + 1);
  LabeledPair base = base_pair;
  if (!base.id) base.id = "base";
  batch.push_back(base);
  for (std::size_t i = 0; i < edits.size(); ++i) {
    LabeledPair edited = base_pair;
    edited.text_b = edits[i];
    edited.id = *base.id + "/edit-" + std::to_string(i + 1);
    batch.push_back(std::move(edited));
  }
  auto analysis = consistency_analysis(models, batch, threshold);
  if (analysis.skipped > 0) {
    throw RuntimeFailure("probe_with_edits: " + analysis.diagnostics.front());
  }
  ProbeResult out;
  out.base = analysis.verdicts.front();
  for (std::size_t i = 0; i < edits.size(); ++i) {
    out.edits.push_back({edits[i], analysis.verdicts[i + 1]});
  }
  return out;
}

}  // namespace medsim
