#include <csignal>
#include <pthread.h>
#include <thread>

#include <CLI11.hpp>

#include "commands.hpp"
#include "medsim/checkpoint.hpp"
#include "medsim/error.hpp"

namespace medsim::cli {

void add_serve(CLI::App& app, ServeOptions& o) {
  auto& c = o.config;
  app.add_option("--host", c.host, "Listen address")->capture_default_str();
  app.add_option("--port", c.port, "Listen port, 0 = any free port")
      ->envname("MEDSIM_PORT")
      ->capture_default_str();
  app.add_option("--model", c.model_path, "Model checkpoint")->envname("MEDSIM_MODEL");
  app.add_option("--faqs", c.faq_path, "FAQ store (JSONL); created on first ingest")
      ->envname("MEDSIM_FAQS");
  app.add_option("--replacements", c.replacement_map_path,
                 "Replacement map JSON (default: built-in COVID terms)");
  app.add_option("--filter-t", c.filter_threshold, "Overlap filter threshold")
      ->envname("MEDSIM_FILTER_T")
      ->capture_default_str();
  app.add_option("--decision-t", c.decision_threshold, "Model decision threshold")
      ->envname("MEDSIM_DECISION_T")
      ->capture_default_str();
  app.add_option("--max-results", c.max_results, "Matches returned per query")
      ->capture_default_str();
  app.add_flag("--check-config", o.check_config, "Print the resolved config and exit");
}

void run_serve(const ServeOptions& o, std::ostream& out, std::ostream& err) {
  const ServiceConfig& cfg = o.config;
  cfg.validate();
  if (cfg.model_path.empty()) throw ValidationError("--model (or MEDSIM_MODEL) is required");
  if (cfg.faq_path.empty()) throw ValidationError("--faqs (or MEDSIM_FAQS) is required");
  print_config(out, "serve", cfg.to_json());
  out.flush();
  if (o.check_config) return;

  ReplacementMap map = cfg.replacement_map_path.empty()
                           ? ReplacementMap::covid_default()
                           : ReplacementMap::load(cfg.replacement_map_path);
  FaqService service(cfg, std::move(map));
  service.load_store();

  HttpServer server(service, &out);
  int port = server.bind(cfg.host, cfg.port);
  err << "listening on " << cfg.host << ":" << port << "\n";

  // SIGINT/SIGTERM are taken by a dedicated thread so stop() runs outside
  // signal context. Threads started below inherit the blocked mask.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);
  std::thread([&server, signals] {
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
  }).detach();

  std::thread loader([&] {
    try {
      auto model = std::make_shared<PairClassifier>(load_checkpoint(std::filesystem::path(cfg.model_path)));
      err << "model loaded: " << model->version() << "\n";
      service.set_scorer(std::move(model));
    } catch (const std::exception& e) {
      err << "model load failed: " << e.what() << "\n";
    }
  });
  server.listen();
  loader.join();
}

}  // namespace medsim::cli
