#include <fstream>
#include <set>

#include <CLI11.hpp>

#include "commands.hpp"
#include "medsim/corpus.hpp"
#include "medsim/error.hpp"
#include "medsim/taskgen.hpp"
#include "medsim/text.hpp"

namespace medsim::cli {

namespace {

ordered_json stats_json(const CorpusStats& s) {
  ordered_json j;
  j["pair_count"] = s.pair_count;
  j["unique_question_count"] = s.unique_question_count;
  j["token_min"] = s.token_min;
  j["token_max"] = s.token_max;
  j["token_median"] = s.token_median;
  j["token_mean"] = s.token_mean;
  return j;
}

std::set<std::string> read_id_list(const std::string& path) {
  std::set<std::string> ids;
  if (path.empty()) return ids;
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  std::string line;
  while (std::getline(in, line)) {
    auto id = text::trim(line);
    if (!id.empty()) ids.emplace(id);
  }
  return ids;
}

}  // namespace

void add_stats(CLI::App& app, StatsOptions& o) {
  app.add_option("--in", o.in, "Pair file (jsonl/csv) or QA corpus")->required();
  app.add_option("--format", o.format, "jsonl, csv or qa; default from extension")
      ->check(CLI::IsMember({"jsonl", "csv", "qa"}));
}

void run_stats(const StatsOptions& o, std::ostream& out) {
  std::string format = o.format.empty()
                           ? std::string(guess_pair_format(o.in) == PairFormat::csv ? "csv" : "jsonl")
                           : o.format;
  ordered_json cfg;
  cfg["in"] = o.in;
  cfg["format"] = format;
  cfg["tokenizer"] = "whitespace";
  print_config(out, "stats", cfg);

  CorpusStats s;
  if (format == "qa") {
    auto corpus = load_qa_corpus(o.in);
    std::vector<Question> questions;
    for (const auto& r : corpus) questions.push_back(r.question);
    s = compute_stats(questions);
  } else {
    s = pair_stats(load_pairs(o.in, parse_pair_format(format)));
  }
  out << stats_json(s).dump(2) << "\n";
}

void add_build_tasks(CLI::App& app, BuildTasksOptions& o) {
  app.add_option("--task", o.task, "qa, aa, qc or qq")
      ->required()
      ->check(CLI::IsMember({"qa", "aa", "qc", "qq"}));
  app.add_option("--in", o.in, "QA corpus JSONL (a pair file for qq)")->required();
  app.add_option("--out", o.out, "Output pair JSONL")->required();
  app.add_option("--seed", o.seed, "Sampling seed")->capture_default_str();
  app.add_option("--negatives", o.negatives, "Negatives per positive")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app.add_option("--min-sentences", o.min_sentences, "Minimum answer sentences for aa")
      ->capture_default_str();
  app.add_option("--exclude", o.exclude, "File of question ids to leave out, one per line");
}

void run_build_tasks(const BuildTasksOptions& o, std::ostream& out) {
  ordered_json cfg;
  cfg["task"] = o.task;
  cfg["in"] = o.in;
  cfg["out"] = o.out;
  cfg["seed"] = o.seed;
  cfg["negatives"] = o.negatives;
  cfg["min_sentences"] = o.min_sentences;
  cfg["exclude"] = o.exclude;
  print_config(out, "build-tasks", cfg);

  TaskGenConfig tg;
  tg.rng_seed = o.seed;
  tg.negatives_per_positive = o.negatives;
  tg.min_sentences_for_aa = o.min_sentences;
  tg.excluded_ids = read_id_list(o.exclude);

  TaskGenResult result;
  if (o.task == "qq") {
    auto pairs = load_pairs(o.in, guess_pair_format(o.in));
    result.pairs = passthrough_qq(pairs);
    result.with_replacement.assign(result.pairs.size(), false);
  } else {
    auto corpus = load_qa_corpus(o.in);
    if (o.task == "qa") {
      result = build_qa_pairs(corpus, tg);
    } else if (o.task == "aa") {
      std::vector<Answer> answers;
      for (const auto& r : corpus) answers.push_back(r.answer);
      result = build_aa_pairs(answers, tg);
    } else {
      std::vector<Question> questions;
      for (const auto& r : corpus) questions.push_back(r.question);
      result = build_qc_pairs(questions, tg);
    }
  }
  save_pairs(o.out, result.pairs);

  std::size_t positives = 0, replaced = 0;
  for (const auto& p : result.pairs) positives += p.label == 1;
  for (bool w : result.with_replacement) replaced += w;
  ordered_json summary;
  summary["pairs"] = result.pairs.size();
  summary["positives"] = positives;
  summary["negatives"] = result.pairs.size() - positives;
  summary["with_replacement"] = replaced;
  summary["skipped"] = result.skipped;
  std::vector<std::filesystem::path> inputs = {o.in};
  if (!o.exclude.empty()) inputs.emplace_back(o.exclude);
  write_manifest(o.out, "build-tasks", cfg, inputs, summary);
  out << summary.dump() << "\n";
}

}  // namespace medsim::cli
