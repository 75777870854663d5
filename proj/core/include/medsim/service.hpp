#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "medsim/classifier.hpp"
#include "medsim/faqmatch.hpp"

namespace medsim {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string model_path;
  std::string faq_path;
  std::string replacement_map_path;  // empty: built-in COVID map
  double filter_threshold = 0.2;
  double decision_threshold = 0.5;
  int max_results = 5;

  static constexpr std::size_t kMaxQuestionChars = 1000;

  void validate() const;  // throws ValidationError
  nlohmann::ordered_json to_json() const;
};

struct HttpResponse {
  int status = 200;
  std::string body;  // JSON
};

// Everything the HTTP layer needs, without HTTP. Readers take the current
// snapshot pointer and never block on ingestion; ingestion is serialized and
// publishes a complete new snapshot.
class FaqService {
 public:
  struct Snapshot {
    std::uint64_t generation = 0;
    std::vector<FaqEntry> entries;
    // Null when there are no entries.
    std::unique_ptr<const FaqIndex> index;
  };

  FaqService(ServiceConfig cfg, ReplacementMap map);

  // Loads cfg.faq_path (missing file = empty store) and publishes it.
  void load_store();
  void set_scorer(std::shared_ptr<const PairScorer> scorer);

  HttpResponse handle_match(std::string_view body) const;
  HttpResponse handle_ingest(std::string_view body);
  HttpResponse handle_health() const;

  std::shared_ptr<const Snapshot> snapshot() const;
  const ServiceConfig& config() const { return cfg_; }

 private:
  std::shared_ptr<const PairScorer> scorer() const;
  void publish(std::shared_ptr<const Snapshot> next);

  ServiceConfig cfg_;
  ReplacementMap map_;
  mutable std::mutex state_mutex_;  // guards the two pointers below
  std::shared_ptr<const Snapshot> snapshot_;
  std::shared_ptr<const PairScorer> scorer_;
  bool store_loaded_ = false;
  std::mutex ingest_mutex_;
};

// Thin cpp-httplib front end: POST /v1/match, POST /v1/faqs, GET /v1/healthz.
// Writes one JSON log line per request to `log` when non-null.
class HttpServer {
 public:
  HttpServer(FaqService& service, std::ostream* log);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Binds; port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  void listen();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace medsim
