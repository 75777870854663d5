#include <fstream>
#include <map>

#include <CLI11.hpp>

#include "commands.hpp"
#include "medsim/attention_encoder.hpp"
#include "medsim/checkpoint.hpp"
#include "medsim/error.hpp"
#include "medsim/eval.hpp"
#include "medsim/random.hpp"
#include "medsim/text.hpp"

namespace medsim::cli {

namespace {

void add_train_flags(CLI::App& app, TrainFlags& f) {
  app.add_option("--max-tokens", f.max_tokens, "Joint token cap per pair")
      ->capture_default_str();
  app.add_option("--lr", f.lr, "Learning rate")->capture_default_str();
  app.add_option("--batch-size", f.batch_size, "Mini-batch size")->capture_default_str();
  auto* epochs = app.add_option("--epochs", f.epochs, "Train for exactly this many epochs");
  auto* patience =
      app.add_option("--patience", f.patience, "Early-stopping patience on dev accuracy (default 3)");
  epochs->excludes(patience);
  app.add_option("--max-epochs", f.max_epochs, "Epoch cap under early stopping")
      ->capture_default_str();
  app.add_option("--clip-norm", f.clip_norm, "Global gradient-norm clip, 0 = off")
      ->capture_default_str();
  app.add_option("--dev-fraction", f.dev_fraction,
                 "Share of training seeds held out for early stopping")
      ->capture_default_str();
}

std::vector<LabeledPair> load_any(const std::string& path) {
  return load_pairs(path, guess_pair_format(path));
}

void append_texts(std::vector<std::string>& out, std::span<const LabeledPair> pairs) {
  for (const auto& p : pairs) {
    out.push_back(p.text_a);
    out.push_back(p.text_b);
  }
}

std::pair<std::string, std::string> split_tagged(const std::string& spec) {
  auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
    throw ValidationError("--models expects tag=checkpoint, got '" + spec + "'");
  }
  return {spec.substr(0, eq), spec.substr(eq + 1)};
}

stats::Alternative parse_alternative(const std::string& s) {
  if (s == "greater") return stats::Alternative::greater;
  if (s == "less") return stats::Alternative::less;
  return stats::Alternative::two_sided;
}

ordered_json verdict_json(const ConsistencyVerdict& v) {
  ordered_json j;
  j["pair_id"] = v.pair_id;
  j["verdict"] = to_string(v.verdict);
  j["votes"] = v.votes;
  j["models"] = v.models;
  return j;
}

void emit(const ordered_json& doc, const std::string& path, std::string_view command,
          const ordered_json& cfg, const std::vector<std::filesystem::path>& inputs,
          std::ostream& out) {
  if (path.empty()) {
    out << doc.dump(2) << "\n";
    return;
  }
  std::ofstream f(path);
  f << doc.dump(2) << "\n";
  if (!f) throw RuntimeFailure("cannot write '" + path + "'");
  write_manifest(path, command, cfg, inputs);
}

}  // namespace

TrainConfig TrainFlags::config(std::uint64_t seed) const {
  TrainConfig cfg;
  cfg.max_tokens = max_tokens;
  cfg.learning_rate = lr;
  cfg.batch_size = batch_size;
  cfg.epochs = epochs;
  cfg.early_stop_patience = patience;
  if (!epochs && !patience) cfg.early_stop_patience = 3;
  cfg.max_epochs = max_epochs;
  cfg.clip_norm = clip_norm;
  cfg.rng_seed = seed;
  cfg.validate();
  return cfg;
}

void add_train(CLI::App& app, TrainOptions& o) {
  app.add_option("--final", o.final_path, "Final-task pairs")->required();
  app.add_option("--intermediate", o.intermediate, "Intermediate-task pairs (double fine-tuning)");
  app.add_option("--dev", o.dev, "Dev pairs; default: a seed-disjoint share of --final");
  app.add_option("--init", o.init, "Start from this checkpoint instead of a fresh model");
  app.add_option("--out", o.out, "Checkpoint to write")->required();
  app.add_option("--seed", o.seed, "Initialisation and shuffling seed")->capture_default_str();
  add_train_flags(app, o.train);
  app.add_option("--mid-epochs", o.mid_epochs, "Intermediate-stage epochs")
      ->capture_default_str();
  app.add_option("--mid-lr", o.mid_lr, "Intermediate-stage learning rate (default --lr)");
  app.add_option("--width", o.width, "Encoder width")->capture_default_str();
  app.add_option("--ff-width", o.ff_width, "Feed-forward width")->capture_default_str();
  app.add_option("--layers", o.layers, "Encoder layers")->capture_default_str();
}

void run_train(const TrainOptions& o, std::ostream& out) {
  TrainConfig fin = o.train.config(o.seed);
  TrainConfig mid = fin;
  mid.epochs = o.mid_epochs;
  mid.early_stop_patience.reset();
  mid.learning_rate = o.mid_lr.value_or(o.train.lr);
  mid.validate();

  ordered_json cfg;
  cfg["final"] = o.final_path;
  cfg["intermediate"] = o.intermediate;
  cfg["dev"] = o.dev;
  cfg["init"] = o.init;
  cfg["out"] = o.out;
  cfg["seed"] = o.seed;
  cfg["dev_fraction"] = o.train.dev_fraction;
  cfg["final_stage"] = fin.to_json();
  cfg["intermediate_stage"] = o.intermediate.empty() ? ordered_json() : mid.to_json();
  cfg["encoder"] = {{"width", o.width}, {"ff_width", o.ff_width}, {"layers", o.layers}};
  print_config(out, "train", cfg);

  std::vector<std::filesystem::path> inputs = {o.final_path};
  auto final_pairs = load_any(o.final_path);
  std::vector<LabeledPair> train = final_pairs;
  std::vector<LabeledPair> dev;
  if (!o.dev.empty()) {
    dev = load_any(o.dev);
    inputs.emplace_back(o.dev);
  } else if (fin.early_stop_patience) {
    auto split = split_by_seed(final_pairs, o.train.dev_fraction, 0.0, o.seed);
    train = std::move(split.train);
    dev = std::move(split.dev);
  }
  std::vector<LabeledPair> intermediate;
  if (!o.intermediate.empty()) {
    intermediate = load_any(o.intermediate);
    inputs.emplace_back(o.intermediate);
  }

  std::optional<PairClassifier> base;
  if (!o.init.empty()) {
    base.emplace(load_checkpoint(o.init));
    inputs.emplace_back(o.init);
  } else {
    std::vector<std::string> texts;
    append_texts(texts, train);
    append_texts(texts, intermediate);
    AttentionEncoderConfig ec;
    ec.model_width = o.width;
    ec.ff_width = o.ff_width;
    ec.layers = o.layers;
    ec.init_seed = o.seed;
    base.emplace(std::make_unique<AttentionEncoder>(Vocabulary::build(texts), ec),
                 hash_mix(o.seed, "head"));
  }
  std::optional<std::span<const LabeledPair>> dev_span;
  if (!dev.empty()) dev_span = std::span<const LabeledPair>(dev);

  ordered_json result;
  std::optional<PairClassifier> trained;
  if (!intermediate.empty()) {
    auto r = double_finetune(*base, intermediate, train, dev_span, mid, fin);
    result["intermediate"] = r.intermediate.to_json();
    result["final"] = r.final.to_json();
    trained.emplace(std::move(r.model));
  } else {
    auto r = finetune(*base, train, dev_span, fin);
    result["final"] = r.report.to_json();
    trained.emplace(std::move(r.model));
  }
  trained->set_max_tokens(fin.max_tokens);
  result["train_accuracy"] = evaluate_accuracy(*trained, train, fin.max_tokens);
  if (!dev.empty()) result["dev_accuracy"] = evaluate_accuracy(*trained, dev, fin.max_tokens);
  result["model_version"] = trained->version();
  save_checkpoint(*trained, std::filesystem::path(o.out));
  write_manifest(o.out, "train", cfg, inputs, result);
  out << result.dump() << "\n";
}

void add_eval(CLI::App& app, EvalOptions& o) {
  app.add_option("--models", o.models, "tag=checkpoint, one per model (repeatable)")
      ->required()
      ->expected(1, -1);
  app.add_option("--dataset", o.dataset, "Final-task pairs to split")->required();
  app.add_option("--test", o.test, "Fixed test pairs; default: carve --test-fraction of seeds");
  app.add_option("--test-fraction", o.test_fraction, "Held-out share when --test is absent")
      ->capture_default_str();
  app.add_option("--seeds", o.seeds, "One seed per split")->delimiter(',')->capture_default_str();
  app.add_option("--baseline", o.baseline, "Tag the others are compared to (default: first)");
  app.add_option("--alternative", o.alternative, "two-sided, greater or less")
      ->capture_default_str()
      ->check(CLI::IsMember({"two-sided", "greater", "less"}));
  app.add_option("--regime", o.regime, "Label for the table's regime column")
      ->capture_default_str();
  app.add_option("--out", o.out, "Write the report JSON here (default: stdout)");
  app.add_flag("--parallel", o.parallel, "Train the splits on separate threads");
  add_train_flags(app, o.train);
}

void run_eval(const EvalOptions& o, std::ostream& out) {
  if (o.seeds.size() < 2) throw ValidationError("--seeds needs at least two seeds");
  std::vector<std::pair<std::string, std::string>> models;
  for (const auto& m : o.models) models.push_back(split_tagged(m));
  std::string baseline = o.baseline.empty() ? models.front().first : o.baseline;
  bool found = false;
  for (const auto& [tag, _] : models) found = found || tag == baseline;
  if (!found) throw ValidationError("--baseline '" + baseline + "' is not among --models");

  ordered_json cfg;
  cfg["models"] = o.models;
  cfg["dataset"] = o.dataset;
  cfg["test"] = o.test;
  cfg["test_fraction"] = o.test.empty() ? ordered_json(o.test_fraction) : ordered_json();
  cfg["seeds"] = o.seeds;
  cfg["baseline"] = baseline;
  cfg["alternative"] = o.alternative;
  cfg["dev_fraction"] = o.train.dev_fraction;
  cfg["fine_tune"] = o.train.config(0).to_json();
  cfg["fine_tune"].erase("rng_seed");
  cfg["parallel"] = o.parallel;
  print_config(out, "eval", cfg);

  std::vector<std::filesystem::path> inputs = {o.dataset};
  auto dataset = load_any(o.dataset);
  std::vector<LabeledPair> pool, test;
  if (!o.test.empty()) {
    pool = dataset;
    test = load_any(o.test);
    inputs.emplace_back(o.test);
  } else {
    auto split = split_by_seed(dataset, 0.0, o.test_fraction, o.seeds.front());
    pool = std::move(split.train);
    test = std::move(split.test);
  }
  if (test.empty()) throw ValidationError("test set is empty");

  std::vector<EvalReport> reports;
  for (const auto& [tag, path] : models) {
    inputs.emplace_back(path);
    const PairClassifier start = load_checkpoint(std::filesystem::path(path));
    auto trainer = [&](const SplitData& s) {
      TrainConfig tc = o.train.config(s.seed);
      std::optional<std::span<const LabeledPair>> dev;
      if (!s.dev.empty()) dev = std::span<const LabeledPair>(s.dev);
      auto r = finetune(start, s.train, dev, tc);
      return evaluate_accuracy(r.model, s.test, tc.max_tokens);
    };
    RunSplitsOptions ro;
    ro.model_tag = tag;
    ro.dev_fraction = o.train.dev_fraction;
    ro.parallel = o.parallel;
    reports.push_back(run_splits(trainer, pool, test, o.seeds, o.seeds.size(), ro));
  }
  const EvalReport* base = nullptr;
  for (const auto& r : reports) {
    if (r.model_tag == baseline) base = &r;
  }
  for (auto& r : reports) {
    if (&r != base) r.comparisons.push_back(compare(r, *base, parse_alternative(o.alternative)));
  }

  ordered_json doc;
  doc["regime"] = o.regime;
  doc["test_size"] = test.size();
  doc["reports"] = ordered_json::array();
  for (const auto& r : reports) doc["reports"].push_back(r.to_json());
  emit(doc, o.out, "eval", cfg, inputs, out);
  out << render_table(reports, o.regime);
}

void add_probe(CLI::App& app, ProbeOptions& o) {
  app.add_option("--models", o.models, "Checkpoints, one per split model (at least 4)")
      ->required()
      ->expected(1, -1)
      ->check(CLI::ExistingFile);
  auto* pairs = app.add_option("--pairs", o.pairs, "Pairs to classify as consistent or mixed");
  auto* edits = app.add_option("--edits", o.edits,
                               "JSONL probes: text_a, text_b, label and an edits list");
  pairs->excludes(edits);
  app.add_option("--threshold", o.threshold, "Decision threshold (default: the models')");
  app.add_option("--out", o.out, "Write results here (default: stdout)");
}

void run_probe(const ProbeOptions& o, std::ostream& out) {
  if (o.pairs.empty() == o.edits.empty()) {
    throw ValidationError("exactly one of --pairs or --edits is required");
  }
  ordered_json cfg;
  cfg["models"] = o.models;
  cfg["pairs"] = o.pairs;
  cfg["edits"] = o.edits;
  cfg["threshold"] = o.threshold ? ordered_json(*o.threshold) : ordered_json();
  cfg["out"] = o.out;
  print_config(out, "probe", cfg);

  std::vector<PairClassifier> models;
  std::vector<std::filesystem::path> inputs;
  for (const auto& path : o.models) {
    models.push_back(load_checkpoint(std::filesystem::path(path)));
    inputs.emplace_back(path);
  }
  double threshold = o.threshold.value_or(models.front().threshold());
  if (!o.threshold) {
    for (const auto& m : models) {
      if (m.threshold() != threshold) {
        throw ValidationError("models disagree on the decision threshold; pass --threshold");
      }
    }
  }
  std::vector<const PairScorer*> scorers;
  for (const auto& m : models) scorers.push_back(&m);

  ordered_json doc;
  if (!o.pairs.empty()) {
    inputs.emplace_back(o.pairs);
    auto pairs = load_any(o.pairs);
    auto result = consistency_analysis(scorers, pairs, threshold);
    std::map<std::string, int> counts;
    doc["verdicts"] = ordered_json::array();
    for (const auto& v : result.verdicts) {
      doc["verdicts"].push_back(verdict_json(v));
      ++counts[std::string(to_string(v.verdict))];
    }
    doc["summary"] = counts;
    doc["skipped"] = result.skipped;
    doc["diagnostics"] = result.diagnostics;
  } else {
    inputs.emplace_back(o.edits);
    std::ifstream in(o.edits);
    if (!in) throw ValidationError("cannot open '" + o.edits + "'");
    doc["probes"] = ordered_json::array();
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
      ++row;
      if (text::trim(line).empty()) continue;
      nlohmann::json j;
      LabeledPair base;
      std::vector<std::string> edits;
      try {
        j = nlohmann::json::parse(line);
        base.text_a = j.at("text_a").get<std::string>();
        base.text_b = j.at("text_b").get<std::string>();
        base.label = j.at("label").get<int>();
        if (j.contains("id")) base.id = j["id"].get<std::string>();
        edits = j.at("edits").get<std::vector<std::string>>();
        validate(base);
      } catch (const std::exception& e) {
        throw ValidationError(o.edits + ": line " + std::to_string(row) + ": " + e.what());
      }
      if (!base.id) base.id = "probe-" + std::to_string(row);
      auto r = probe_with_edits(scorers, base, edits, threshold);
      ordered_json p;
      p["id"] = *base.id;
      p["text_a"] = base.text_a;
      p["base"] = verdict_json(r.base);
      p["edits"] = ordered_json::array();
      for (const auto& e : r.edits) {
        ordered_json ej = verdict_json(e.verdict);
        ej["text_b"] = e.edited_text;
        p["edits"].push_back(std::move(ej));
      }
      doc["probes"].push_back(std::move(p));
    }
  }
  emit(doc, o.out, "probe", cfg, inputs, out);
}

}  // namespace medsim::cli
