#include <cstdlib>
#include <sstream>

#include "cli.hpp"
#include "doctest.h"
#include "fixtures.hpp"
#include "medsim/checkpoint.hpp"
#include "medsim/corpus.hpp"
#include "synthetic.hpp"

using namespace medsim;
using medsim::testing::read_file;
using medsim::testing::TempDir;
using medsim::testing::write_file;
using json = nlohmann::json;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run medsim_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "medsim");
  std::ostringstream out, err;
  Run r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

json resolved_config(const std::string& out) {
  const std::string prefix = "resolved config: ";
  REQUIRE(out.rfind(prefix, 0) == 0);
  return json::parse(out.substr(prefix.size(), out.find('\n') - prefix.size()));
}

struct Workspace {
  TempDir dir;
  std::string qa, final_pairs, test_pairs;

  Workspace() {
    medsim::testing::SynonymDomainConfig cfg;
    cfg.qa_samples_per_cell = 2;
    cfg.final_train_pairs = 40;
    cfg.final_dev_pairs = 8;
    cfg.final_test_pairs = 16;
    auto d = medsim::testing::make_synonym_domain(cfg, 3);
    qa = (dir / "qa.jsonl").string();
    final_pairs = (dir / "final.jsonl").string();
    test_pairs = (dir / "test.jsonl").string();
    write_file(qa, to_jsonl(std::span<const QaRecord>(d.qa_corpus)));
    save_pairs(final_pairs, d.final_train);
    save_pairs(test_pairs, d.final_test);
  }

  std::string path(const std::string& name) const { return (dir / name).string(); }
};

std::vector<std::string> small_model_flags() {
  return {"--width", "8", "--ff-width", "16", "--lr", "0.3", "--batch-size", "8",
          "--clip-norm", "1"};
}

}  // namespace

TEST_CASE("usage errors exit 1") {
  auto r = medsim_cli({"frobnicate"});
  CHECK(r.code == 1);
  CHECK(r.err.find("Usage") != std::string::npos);
  CHECK(medsim_cli({}).code == 1);
  CHECK(medsim_cli({"stats", "--in", "x.jsonl", "--bogus"}).code == 1);
  CHECK(medsim_cli({"stats"}).code == 1);
  CHECK(medsim_cli({"build-tasks", "--task", "zz", "--in", "a", "--out", "b"}).code == 1);
  auto help = medsim_cli({"train", "--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("--intermediate") != std::string::npos);
}

TEST_CASE("stats prints config then corpus statistics") {
  TempDir dir;
  std::string path = (dir / "pairs.jsonl").string();
  write_file(path, R"({"text_a":"a b","text_b":"a b c","label":1,"kind":"QQ"})" "\n");
  auto r = medsim_cli({"stats", "--in", path});
  REQUIRE(r.code == 0);
  CHECK(resolved_config(r.out)["config"]["in"] == path);
  auto stats = json::parse(r.out.substr(r.out.find('\n') + 1));
  CHECK(stats["token_min"] == 2);
  CHECK(stats["token_max"] == 3);
  CHECK(stats["token_mean"] == 2.5);
  CHECK(stats["pair_count"] == 1);

  CHECK(medsim_cli({"stats", "--in", (dir / "missing.jsonl").string()}).code == 1);
  write_file(path, R"({"text_a":"a","text_b":"b","label":2,"kind":"QQ"})" "\n");
  auto bad = medsim_cli({"stats", "--in", path});
  CHECK(bad.code == 1);
  CHECK(bad.err.find("row 1") != std::string::npos);
}

TEST_CASE("build-tasks is deterministic and writes only declared paths") {
  Workspace ws;
  for (std::string task : {"qa", "aa", "qc"}) {
    std::string a = ws.path(task + "-1.jsonl"), b = ws.path(task + "-2.jsonl");
    auto r1 = medsim_cli({"build-tasks", "--task", task, "--in", ws.qa, "--out", a, "--seed", "7"});
    auto r2 = medsim_cli({"build-tasks", "--task", task, "--in", ws.qa, "--out", b, "--seed", "7"});
    REQUIRE(r1.code == 0);
    REQUIRE(r2.code == 0);
    CHECK(read_file(a) == read_file(b));
    auto manifest = json::parse(read_file(a + ".manifest.json"));
    CHECK(manifest["command"] == "build-tasks");
    CHECK(manifest["config"]["seed"] == 7);
    CHECK(manifest["inputs"][0]["path"] == ws.qa);
    CHECK(resolved_config(r1.out)["config"] == manifest["config"]);
  }
  std::set<std::string> names;
  for (const auto& e : std::filesystem::directory_iterator(ws.dir.path())) {
    names.insert(e.path().filename().string());
  }
  CHECK(names.size() == 3 + 3 * 2 * 2);

  auto qq = medsim_cli({"build-tasks", "--task", "qq", "--in", ws.final_pairs, "--out",
                        ws.path("qq.jsonl")});
  CHECK(qq.code == 0);
  CHECK(read_file(ws.path("qq.jsonl")) == read_file(ws.final_pairs));
}

TEST_CASE("build-tasks reports a lone category as a validation error") {
  TempDir dir;
  std::string qa = (dir / "qa.jsonl").string();
  write_file(qa,
             R"({"id":"1","question":"q1","answer":"a1","category":"x"})" "\n"
             R"({"id":"2","question":"q2","answer":"a2","category":"y"})" "\n");
  auto r = medsim_cli({"build-tasks", "--task", "qa", "--in", qa, "--out",
                       (dir / "o.jsonl").string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("category") != std::string::npos);
}

TEST_CASE("train, double train, eval and probe") {
  Workspace ws;
  auto flags = small_model_flags();
  std::vector<std::string> base = {"train", "--final", ws.final_pairs, "--out",
                                   ws.path("base.ckpt"), "--epochs", "0", "--seed", "1"};
  base.insert(base.end(), flags.begin(), flags.end());
  auto r = medsim_cli(base);
  REQUIRE(r.code == 0);
  CHECK(resolved_config(r.out)["config"]["final_stage"]["epochs"] == 0);
  auto ckpt = load_checkpoint(std::filesystem::path(ws.path("base.ckpt")));
  CHECK(ckpt.encoder().width() == 16);

  REQUIRE(medsim_cli({"build-tasks", "--task", "qa", "--in", ws.qa, "--out",
                      ws.path("qa-pairs.jsonl")})
              .code == 0);
  std::vector<std::string> dbl = {"train", "--final", ws.final_pairs, "--intermediate",
                                  ws.path("qa-pairs.jsonl"), "--out", ws.path("qa.ckpt"),
                                  "--mid-epochs", "1", "--patience", "1", "--max-epochs", "3"};
  dbl.insert(dbl.end(), flags.begin(), flags.end());
  r = medsim_cli(dbl);
  REQUIRE(r.code == 0);
  auto manifest = json::parse(read_file(ws.path("qa.ckpt.manifest.json")));
  CHECK(manifest["result"]["intermediate"]["stopped_epoch"] == 1);
  CHECK(manifest["result"].contains("dev_accuracy"));

  std::vector<std::string> mid_only = {"train", "--final", ws.path("qa-pairs.jsonl"), "--out",
                                       ws.path("mid.ckpt"), "--epochs", "1"};
  mid_only.insert(mid_only.end(), flags.begin(), flags.end());
  REQUIRE(medsim_cli(mid_only).code == 0);

  r = medsim_cli({"eval", "--models", "baseline=" + ws.path("base.ckpt"),
                  "QA=" + ws.path("mid.ckpt"), "--dataset", ws.final_pairs, "--test",
                  ws.test_pairs, "--seeds", "1,2,3", "--epochs", "1", "--lr", "0.3",
                  "--batch-size", "8", "--out", ws.path("report.json")});
  REQUIRE(r.code == 0);
  auto report = json::parse(read_file(ws.path("report.json")));
  REQUIRE(report["reports"].size() == 2);
  CHECK(report["reports"][0]["runs"].size() == 3);
  CHECK(report["reports"][1]["comparisons"][0]["tag_b"] == "baseline");
  CHECK(report["test_size"] == 16);
  CHECK(r.out.find("baseline") != std::string::npos);
  CHECK(r.out.find("±") != std::string::npos);
  CHECK(std::filesystem::exists(ws.path("report.json.manifest.json")));

  auto bad_model = medsim_cli({"eval", "--models", "nonsense", "--dataset", ws.final_pairs});
  CHECK(bad_model.code == 1);

  std::vector<std::string> probe = {"probe", "--models"};
  for (int i = 0; i < 5; ++i) probe.push_back(ws.path("qa.ckpt"));
  auto pairs_probe = probe;
  pairs_probe.insert(pairs_probe.end(), {"--pairs", ws.test_pairs, "--out", ws.path("c.json")});
  REQUIRE(medsim_cli(pairs_probe).code == 0);
  auto c = json::parse(read_file(ws.path("c.json")));
  CHECK(c["verdicts"].size() == 16);
  for (const auto& v : c["verdicts"]) CHECK(v["verdict"] != "mixed");

  write_file(ws.path("edits.jsonl"),
             json{{"text_a", "intent0a intent0b zor0ax?"},
                  {"text_b", "intent0a intent0b zor0ium?"},
                  {"label", 1},
                  {"edits", {"intent0a intent0b zor0ax?", "intent1a intent1b zor0ax?"}}}
                     .dump());
  auto edits_probe = probe;
  edits_probe.insert(edits_probe.end(), {"--edits", ws.path("edits.jsonl")});
  r = medsim_cli(edits_probe);
  REQUIRE(r.code == 0);
  auto probes = json::parse(r.out.substr(r.out.find('\n') + 1));
  REQUIRE(probes["probes"][0]["edits"].size() == 2);
  CHECK(probes["probes"][0]["edits"][1]["text_b"] == "intent1a intent1b zor0ax?");

  auto both = probe;
  both.insert(both.end(), {"--pairs", ws.test_pairs, "--edits", ws.path("edits.jsonl")});
  CHECK(medsim_cli(both).code == 1);
}

TEST_CASE("runtime failures exit 2") {
  Workspace ws;
  auto r = medsim_cli({"train", "--final", ws.final_pairs, "--out", ws.path("x.ckpt"),
                       "--epochs", "3", "--lr", "1e300", "--width", "4", "--ff-width", "4"});
  CHECK(r.code == 2);
  CHECK(r.err.find("non-finite") != std::string::npos);
}

TEST_CASE("serve resolves flags over environment") {
  TempDir dir;
  std::string faqs = (dir / "faqs.jsonl").string();
  setenv("MEDSIM_PORT", "9123", 1);
  setenv("MEDSIM_MODEL", "/models/m.ckpt", 1);
  setenv("MEDSIM_FILTER_T", "0.3", 1);
  auto r = medsim_cli({"serve", "--faqs", faqs, "--check-config"});
  REQUIRE(r.code == 0);
  auto cfg = resolved_config(r.out)["config"];
  CHECK(cfg["port"] == 9123);
  CHECK(cfg["model_path"] == "/models/m.ckpt");
  CHECK(cfg["filter_threshold"] == 0.3);
  CHECK(cfg["decision_threshold"] == 0.5);

  r = medsim_cli({"serve", "--faqs", faqs, "--port", "7000", "--check-config"});
  CHECK(resolved_config(r.out)["config"]["port"] == 7000);
  unsetenv("MEDSIM_PORT");
  unsetenv("MEDSIM_MODEL");
  unsetenv("MEDSIM_FILTER_T");

  CHECK(medsim_cli({"serve", "--faqs", faqs, "--check-config"}).code == 1);
  CHECK(medsim_cli({"serve", "--faqs", faqs, "--model", "m", "--decision-t", "2",
                    "--check-config"})
            .code == 1);
}
