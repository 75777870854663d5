#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <set>
#include <thread>

#include "medsim/attention_encoder.hpp"
#include "medsim/service.hpp"
// httplib after medsim headers: resolv.h defines a macro that clashes with Eigen.
#include "fixtures.hpp"
#include "harness.hpp"
#include "httplib.h"

namespace medsim::acceptance {

namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

constexpr double kLatencyBudgetMs = 1000.0;
constexpr int kStressRequests = 10000;

json faq_row(const std::string& id, const std::string& question, const std::string& answer) {
  return {{"id", id},           {"question", question},          {"answer", answer},
          {"source", "CDC"},    {"last_updated", "2020-03-25"}};
}

double percentile50(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  return xs[xs.size() / 2];
}

struct RunningServer {
  medsim::testing::TempDir dir;
  std::unique_ptr<FaqService> service;
  std::unique_ptr<HttpServer> server;
  std::thread loop;
  int port = 0;

  explicit RunningServer(std::shared_ptr<const PairScorer> scorer) {
    ServiceConfig cfg;
    cfg.faq_path = (dir / "faqs.jsonl").string();
    service = std::make_unique<FaqService>(cfg, ReplacementMap::covid_default());
    service->load_store();
    service->set_scorer(std::move(scorer));
    server = std::make_unique<HttpServer>(*service, nullptr);
    port = server->bind("127.0.0.1", 0);
    loop = std::thread([this] { server->listen(); });
    server->wait_until_ready();
  }
  ~RunningServer() {
    server->stop();
    loop.join();
  }
};

// Stub-model end to end over HTTP, then the latency budget with the real
// desk-scale encoder scoring every one of 1000 FAQs.
Outcome service_end_to_end() {
  std::string notes;
  bool ok = true;
  auto note = [&](bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      notes += " FAILED:" + what;
    }
  };

  RunningServer rs(std::make_shared<medsim::testing::JaccardScorer>());
  httplib::Client client("127.0.0.1", rs.port);
  client.set_read_timeout(30, 0);

  Rng rng(2020);
  auto faqs = medsim::testing::random_faqs(rng, 1000);
  std::string payload;
  for (auto& f : faqs) {
    f.question += " ref" + f.id.substr(4);
    payload += faq_row(f.id, f.question, f.answer).dump() + "\n";
  }
  auto ing = client.Post("/v1/faqs", payload, "application/x-ndjson");
  note(ing && ing->status == 200 && json::parse(ing->body)["ingested"] == 1000, "ingest");

  std::vector<double> latency_ms;
  int verbatim_ok = 0;
  for (int i = 0; i < 50; ++i) {
    const auto& f = faqs[uniform_index(rng, faqs.size())];
    auto t0 = Clock::now();
    auto r = client.Post("/v1/match", json{{"question", f.question}}.dump(), "application/json");
    latency_ms.push_back(std::chrono::duration<double, std::milli>(Clock::now() - t0).count());
    if (r && r->status == 200) {
      auto m = json::parse(r->body)["matches"];
      verbatim_ok += !m.empty() && m[0]["id"] == f.id;
    }
  }
  note(verbatim_ok == 50, "verbatim rank 1 (" + std::to_string(verbatim_ok) + "/50)");
  auto none = client.Post("/v1/match", json{{"question", "xylophone zeppelin"}}.dump(),
                          "application/json");
  note(none && none->status == 200 && json::parse(none->body)["matches"].empty(),
       "no-overlap query");
  double p50_stub = percentile50(latency_ms);
  note(p50_stub < kLatencyBudgetMs, "stub p50");

  // Desk-scale encoder, filter disabled so all 1000 FAQs are scored.
  std::vector<std::string> texts;
  for (const auto& f : faqs) texts.push_back(f.question);
  AttentionEncoderConfig ec;
  ec.init_seed = 1;
  PairClassifier model(std::make_unique<AttentionEncoder>(Vocabulary::build(texts), ec), 1);
  FaqIndex index(faqs, ReplacementMap::covid_default());
  MatchOptions everything;
  everything.filter_threshold = 0.0;
  everything.decision_threshold = 0.0;
  std::vector<double> model_ms;
  for (int i = 0; i < 9; ++i) {
    auto t0 = Clock::now();
    auto hits = match(faqs[i * 97].question, index, model, everything);
    model_ms.push_back(std::chrono::duration<double, std::milli>(Clock::now() - t0).count());
    note(hits.size() == 1000, "model scored all");
  }
  double p50_model = percentile50(model_ms);
  note(p50_model < kLatencyBudgetMs, "encoder p50");

  char buf[160];
  std::snprintf(buf, sizeof buf,
                "1000 FAQs ingested; verbatim rank-1 %d/50; p50 %.1f ms (stub, HTTP), %.1f ms "
                "(encoder, 1000 scored)",
                verbatim_ok, p50_stub, p50_model);
  return verdict(ok, buf + notes);
}

// Readers hammer /v1/match while a writer republishes the same FAQ ids with
// answers tagged by generation. A response mixing generations is a violation.
Outcome snapshot_stress() {
  RunningServer rs(std::make_shared<medsim::testing::ConstantScorer>(0.9));
  auto generation = [](int gen) {
    std::string body;
    for (int i = 0; i < 6; ++i) {
      body += faq_row("s" + std::to_string(i), "swap fever question " + std::to_string(i),
                      "generation " + std::to_string(gen))
                  .dump() +
              "\n";
    }
    return body;
  };
  {
    httplib::Client c("127.0.0.1", rs.port);
    c.Post("/v1/faqs", generation(0), "application/x-ndjson");
  }
  std::atomic<int> issued{0}, violations{0}, errors{0};
  std::atomic<bool> readers_done{false};
  std::atomic<int> swaps{0};
  std::thread writer([&] {
    httplib::Client c("127.0.0.1", rs.port);
    for (int gen = 1; !readers_done; ++gen) {
      auto r = c.Post("/v1/faqs", generation(gen), "application/x-ndjson");
      if (!r || r->status != 200) ++errors;
      ++swaps;
      std::this_thread::sleep_for(std::chrono::milliseconds(2));
    }
  });
  std::vector<std::thread> readers;
  for (int t = 0; t < 4; ++t) {
    readers.emplace_back([&] {
      httplib::Client c("127.0.0.1", rs.port);
      c.set_keep_alive(true);
      c.set_tcp_nodelay(true);
      const std::string body = json{{"question", "swap fever question"}}.dump();
      while (issued++ < kStressRequests) {
        auto r = c.Post("/v1/match", body, "application/json");
        if (!r || r->status != 200) {
          ++errors;
          continue;
        }
        std::set<std::string> gens;
        auto matches = json::parse(r->body)["matches"];
        for (const auto& m : matches) gens.insert(m["answer"].get<std::string>());
        if (gens.size() != 1 || matches.size() != 5) ++violations;
      }
    });
  }
  for (auto& r : readers) r.join();
  readers_done = true;
  writer.join();
  return verdict(violations == 0 && errors == 0 && swaps > 1,
                 std::to_string(kStressRequests) + " requests across " + std::to_string(swaps) +
                     " snapshot swaps: " + std::to_string(violations) + " mixed reads, " +
                     std::to_string(errors) + " errors");
}

}  // namespace

std::vector<Criterion> serving_criteria() {
  return {
      {"service-end-to-end", 120.0, service_end_to_end},
      {"service-snapshot-stress", 60.0, snapshot_stress},
  };
}

}  // namespace medsim::acceptance
