#include "medsim/service.hpp"

#include <chrono>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include "medsim/error.hpp"
#include "medsim/faq_store.hpp"
#include "medsim/text.hpp"

namespace medsim {

using nlohmann::json;
using nlohmann::ordered_json;

void ServiceConfig::validate() const {
  if (!(filter_threshold >= 0.0 && filter_threshold <= 1.0)) {
    throw ValidationError("filter_threshold must be in [0, 1]");
  }
  if (!(decision_threshold >= 0.0 && decision_threshold <= 1.0)) {
    throw ValidationError("decision_threshold must be in [0, 1]");
  }
  if (max_results < 1) throw ValidationError("max_results must be >= 1");
  if (port < 0 || port > 65535) throw ValidationError("port out of range");
}

ordered_json ServiceConfig::to_json() const {
  ordered_json j;
  j["host"] = host;
  j["port"] = port;
  j["model_path"] = model_path;
  j["faq_path"] = faq_path;
  j["replacement_map_path"] = replacement_map_path;
  j["filter_threshold"] = filter_threshold;
  j["decision_threshold"] = decision_threshold;
  j["max_results"] = max_results;
  return j;
}

namespace {

HttpResponse error_response(int status, std::string_view message) {
  return {status, ordered_json{{"error", message}}.dump()};
}

}  // namespace

FaqService::FaqService(ServiceConfig cfg, ReplacementMap map)
    : cfg_(std::move(cfg)), map_(std::move(map)) {
  cfg_.validate();
  snapshot_ = std::make_shared<const Snapshot>();
}

void FaqService::load_store() {
  std::lock_guard ingest(ingest_mutex_);
  std::vector<FaqEntry> entries;
  if (!cfg_.faq_path.empty()) entries = load_faq_store(cfg_.faq_path);
  auto next = std::make_shared<Snapshot>();
  next->generation = snapshot()->generation + 1;
  if (!entries.empty()) next->index = std::make_unique<FaqIndex>(entries, map_);
  next->entries = std::move(entries);
  publish(std::move(next));
  std::lock_guard lock(state_mutex_);
  store_loaded_ = true;
}

void FaqService::set_scorer(std::shared_ptr<const PairScorer> scorer) {
  std::lock_guard lock(state_mutex_);
  scorer_ = std::move(scorer);
}

std::shared_ptr<const FaqService::Snapshot> FaqService::snapshot() const {
  std::lock_guard lock(state_mutex_);
  return snapshot_;
}

std::shared_ptr<const PairScorer> FaqService::scorer() const {
  std::lock_guard lock(state_mutex_);
  return scorer_;
}

void FaqService::publish(std::shared_ptr<const Snapshot> next) {
  std::lock_guard lock(state_mutex_);
  snapshot_ = std::move(next);
}

HttpResponse FaqService::handle_match(std::string_view body) const {
  const auto start = std::chrono::steady_clock::now();
  json request;
  try {
    request = json::parse(body);
  } catch (const json::exception&) {
    return error_response(400, "body must be a json object");
  }
  if (!request.is_object() || !request.contains("question") ||
      !request["question"].is_string()) {
    return error_response(400, "field question: expected string");
  }
  const auto question = request["question"].get<std::string>();
  if (text::trim(question).empty()) {
    return error_response(400, "field question: empty");
  }
  if (text::utf8_length(question) > ServiceConfig::kMaxQuestionChars) {
    return error_response(400, "field question: longer than 1000 characters");
  }
  auto model = scorer();
  if (!model) return error_response(503, "model not loaded");
  auto snap = snapshot();

  ordered_json matches = ordered_json::array();
  if (snap->index) {
    MatchOptions options;
    options.filter_threshold = cfg_.filter_threshold;
    options.decision_threshold = cfg_.decision_threshold;
    std::vector<MatchResult> results;
    try {
      results = match(question, *snap->index, *model, options);
    } catch (const std::exception& e) {
      return error_response(500, std::string("scoring failed: ") + e.what());
    }
    const auto limit = static_cast<std::size_t>(cfg_.max_results);
    for (std::size_t i = 0; i < results.size() && i < limit; ++i) {
      const auto& entry = snap->index->entries()[results[i].entry_index];
      ordered_json m;
      m["id"] = entry.id;
      m["question"] = entry.question;
      m["answer"] = entry.answer;
      m["source"] = entry.source;
      m["last_updated"] = entry.last_updated;
      m["score"] = results[i].p_positive;
      matches.push_back(std::move(m));
    }
  }
  ordered_json response;
  response["matches"] = std::move(matches);
  response["elapsed_ms"] =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
          .count();
  return {200, response.dump()};
}

HttpResponse FaqService::handle_ingest(std::string_view body) {
  std::vector<FaqEntry> incoming;
  try {
    incoming = parse_faq_payload(body);
  } catch (const ValidationError& e) {
    return error_response(400, e.what());
  }

  std::lock_guard ingest(ingest_mutex_);
  auto current = snapshot();
  std::vector<FaqEntry> merged = current->entries;
  std::unordered_map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < merged.size(); ++i) position[merged[i].id] = i;

  std::unordered_set<std::string> in_payload;
  int ingested = 0;
  int rejected = 0;
  for (auto& e : incoming) {
    if (!in_payload.insert(e.id).second) {
      ++rejected;  // repeated id within one payload: first one wins
      continue;
    }
    auto it = position.find(e.id);
    if (it != position.end()) {
      merged[it->second] = std::move(e);
    } else {
      position[e.id] = merged.size();
      merged.push_back(std::move(e));
    }
    ++ingested;
  }

  auto next = std::make_shared<Snapshot>();
  next->generation = current->generation + 1;
  try {
    if (!merged.empty()) next->index = std::make_unique<FaqIndex>(merged, map_);
  } catch (const ValidationError& e) {
    return error_response(400, e.what());
  }
  try {
    if (!cfg_.faq_path.empty()) save_faq_store(cfg_.faq_path, merged);
  } catch (const std::exception& e) {
    return error_response(500, std::string("store write failed: ") + e.what());
  }
  next->entries = std::move(merged);
  publish(std::move(next));

  ordered_json response;
  response["ingested"] = ingested;
  response["rejected"] = rejected;
  return {200, response.dump()};
}

HttpResponse FaqService::handle_health() const {
  std::shared_ptr<const Snapshot> snap;
  std::shared_ptr<const PairScorer> model;
  bool loaded = false;
  {
    std::lock_guard lock(state_mutex_);
    snap = snapshot_;
    model = scorer_;
    loaded = store_loaded_;
  }
  const bool ready = model && loaded;
  ordered_json j;
  j["status"] = ready ? "ok" : "loading";
  j["faq_count"] = snap->entries.size();
  j["model_version"] = model ? json(model->version()) : json(nullptr);
  return {ready ? 200 : 503, j.dump()};
}

}  // namespace medsim
