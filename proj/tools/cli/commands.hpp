#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "medsim/service.hpp"
#include "medsim/training.hpp"

namespace CLI {
class App;
}

namespace medsim::cli {

using ordered_json = nlohmann::ordered_json;

struct StatsOptions {
  std::string in;
  std::string format;  // jsonl | csv | qa; empty = from extension
};

struct BuildTasksOptions {
  std::string task;  // qa | aa | qc | qq
  std::string in;
  std::string out;
  std::uint64_t seed = 0;
  int negatives = 1;
  int min_sentences = 3;
  std::string exclude;  // file with one excluded question id per line
};

// Fine-tuning knobs shared by train and eval.
struct TrainFlags {
  std::size_t max_tokens = 200;
  double lr = 2e-5;
  std::size_t batch_size = 16;
  std::optional<int> epochs;
  std::optional<int> patience;
  int max_epochs = 100;
  double clip_norm = 0.0;
  double dev_fraction = 0.1;

  // Patience 3 when neither is given.
  TrainConfig config(std::uint64_t seed) const;
};

struct TrainOptions {
  std::string final_path;
  std::string intermediate;
  std::string dev;
  std::string init;  // start from this checkpoint instead of a fresh model
  std::string out;
  std::uint64_t seed = 0;
  TrainFlags train;
  int mid_epochs = 5;
  std::optional<double> mid_lr;
  std::size_t width = 16;
  std::size_t ff_width = 32;
  std::size_t layers = 2;
};

struct EvalOptions {
  std::vector<std::string> models;  // tag=checkpoint
  std::string dataset;
  std::string test;
  double test_fraction = 0.2;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::string baseline;
  std::string alternative = "two-sided";
  std::string regime = "final";
  std::string out;
  bool parallel = false;
  TrainFlags train;
};

struct ProbeOptions {
  std::vector<std::string> models;
  std::string pairs;
  std::string edits;
  std::optional<double> threshold;
  std::string out;
};

struct ServeOptions {
  ServiceConfig config;
  bool check_config = false;
};

void add_stats(CLI::App& app, StatsOptions& o);
void add_build_tasks(CLI::App& app, BuildTasksOptions& o);
void add_train(CLI::App& app, TrainOptions& o);
void add_eval(CLI::App& app, EvalOptions& o);
void add_probe(CLI::App& app, ProbeOptions& o);
void add_serve(CLI::App& app, ServeOptions& o);

void run_stats(const StatsOptions& o, std::ostream& out);
void run_build_tasks(const BuildTasksOptions& o, std::ostream& out);
void run_train(const TrainOptions& o, std::ostream& out);
void run_eval(const EvalOptions& o, std::ostream& out);
void run_probe(const ProbeOptions& o, std::ostream& out);
void run_serve(const ServeOptions& o, std::ostream& out, std::ostream& err);

// Prints the configuration a run will use, as one JSON line.
void print_config(std::ostream& out, std::string_view command, const ordered_json& config);

// Writes <artifact>.manifest.json: command, resolved config, input
// fingerprints and any result summary.
void write_manifest(const std::filesystem::path& artifact, std::string_view command,
                    const ordered_json& config,
                    const std::vector<std::filesystem::path>& inputs,
                    const ordered_json& result = nullptr);

std::filesystem::path manifest_path(const std::filesystem::path& artifact);

}  // namespace medsim::cli
