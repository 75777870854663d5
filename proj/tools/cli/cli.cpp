#include "cli.hpp"

#include <CLI11.hpp>

#include "commands.hpp"
#include "medsim/error.hpp"

namespace medsim::cli {

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"medsim: medical question similarity pipeline", "medsim"};
  app.require_subcommand(1);
  app.set_version_flag("--version", MEDSIM_VERSION);

  StatsOptions stats;
  BuildTasksOptions build;
  TrainOptions train;
  EvalOptions eval;
  ProbeOptions probe;
  ServeOptions serve;
  auto* stats_cmd = app.add_subcommand("stats", "Token statistics of a pair file or QA corpus");
  auto* build_cmd = app.add_subcommand("build-tasks", "Build an intermediate-task pair set");
  auto* train_cmd = app.add_subcommand("train", "Fine-tune a classifier, optionally twice");
  auto* eval_cmd = app.add_subcommand("eval", "Multi-split evaluation with paired t-tests");
  auto* probe_cmd = app.add_subcommand("probe", "Consistency analysis and edit probing");
  auto* serve_cmd = app.add_subcommand("serve", "Run the FAQ matching HTTP service");
  add_stats(*stats_cmd, stats);
  add_build_tasks(*build_cmd, build);
  add_train(*train_cmd, train);
  add_eval(*eval_cmd, eval);
  add_probe(*probe_cmd, probe);
  add_serve(*serve_cmd, serve);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    app.exit(e, out, err);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kValidation;
  }

  try {
    if (stats_cmd->parsed()) run_stats(stats, out);
    if (build_cmd->parsed()) run_build_tasks(build, out);
    if (train_cmd->parsed()) run_train(train, out);
    if (eval_cmd->parsed()) run_eval(eval, out);
    if (probe_cmd->parsed()) run_probe(probe, out);
    if (serve_cmd->parsed()) run_serve(serve, out, err);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kOk;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace medsim::cli
