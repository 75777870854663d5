#include <map>

#include "doctest.h"
#include "fixtures.hpp"
#include "medsim/error.hpp"
#include "medsim/taskgen.hpp"

using namespace medsim;

namespace {

QaRecord record(std::string id, std::string question, std::string answer,
                std::string category) {
  QaRecord r;
  r.question.id = id;
  r.question.text = std::move(question);
  r.question.category = category;
  r.answer.id = id;
  r.answer.question_id = id;
  r.answer.text = std::move(answer);
  r.answer.category = category;
  return r;
}

Answer answer(std::string id, std::string text, std::string category) {
  return Answer{.id = id, .question_id = id, .text = std::move(text),
                .category = std::move(category)};
}

std::size_t count_label(const std::vector<LabeledPair>& pairs, int label) {
  std::size_t n = 0;
  for (const auto& p : pairs) n += p.label == label;
  return n;
}

}  // namespace

TEST_CASE("split_sentences keeps delimiters") {
  CHECK(split_sentences("S1. S2. S3. S4.") ==
        std::vector<std::string>{"S1.", "S2.", "S3.", "S4."});
  CHECK(split_sentences("Is it 2.5 mg? Yes!  Take it") ==
        std::vector<std::string>{"Is it 2.5 mg?", "Yes!", "Take it"});
  CHECK(split_sentences("   ").empty());
}

TEST_CASE("qa: two records in one category swap answers") {
  std::vector<QaRecord> corpus = {record("1", "q one", "a one", "acne"),
                                  record("2", "q two", "a two", "acne")};
  auto r = build_qa_pairs(corpus, {});
  REQUIRE(r.pairs.size() == 4);
  CHECK(count_label(r.pairs, 1) == 2);
  for (const auto& p : r.pairs) {
    CHECK(p.kind == PairKind::QA);
    if (p.label == 0) {
      CHECK(p.text_b == (p.text_a == "q one" ? "a two" : "a one"));
    }
  }
}

TEST_CASE("qa: a single-record category is an error naming it") {
  std::vector<QaRecord> corpus = {record("1", "q one", "a one", "acne"),
                                  record("2", "q two", "a two", "acne"),
                                  record("3", "q three", "a three", "gout")};
  try {
    build_qa_pairs(corpus, {});
    FAIL("expected error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("gout") != std::string::npos);
  }
}

TEST_CASE("qa: 100-record fixture is deterministic under seed 7") {
  Rng rng(11);
  auto corpus = medsim::testing::random_qa_corpus(rng, 6, 100);
  TaskGenConfig cfg;
  cfg.rng_seed = 7;
  auto a = build_qa_pairs(corpus, cfg);
  auto b = build_qa_pairs(corpus, cfg);
  CHECK(to_jsonl(a.pairs) == to_jsonl(b.pairs));
  cfg.rng_seed = 8;
  CHECK(to_jsonl(build_qa_pairs(corpus, cfg).pairs) != to_jsonl(a.pairs));
}

TEST_CASE("qa: negatives_per_positive and with-replacement fallback") {
  std::vector<QaRecord> corpus = {record("1", "q one", "a one", "acne"),
                                  record("2", "q two", "a two", "acne"),
                                  record("3", "q three", "a three", "acne")};
  TaskGenConfig cfg;
  cfg.negatives_per_positive = 2;
  auto r = build_qa_pairs(corpus, cfg);
  CHECK(count_label(r.pairs, 1) == 3);
  CHECK(count_label(r.pairs, 0) == 6);
  for (bool w : r.with_replacement) CHECK_FALSE(w);

  cfg.negatives_per_positive = 3;  // only two other answers per category
  r = build_qa_pairs(corpus, cfg);
  CHECK(count_label(r.pairs, 0) == 9);
  std::size_t replaced = 0;
  for (bool w : r.with_replacement) replaced += w;
  CHECK(replaced > 0);

  cfg.negatives_per_positive = 0;
  CHECK_THROWS_AS(build_qa_pairs(corpus, cfg), ValidationError);
}

TEST_CASE("qa: excluded ids never appear") {
  Rng rng(4);
  auto corpus = medsim::testing::random_qa_corpus(rng, 4, 40);
  TaskGenConfig cfg;
  cfg.excluded_ids = {"q3", "q17"};
  auto r = build_qa_pairs(corpus, cfg);
  std::map<std::string, std::string> q_text, a_text;
  for (const auto& rec : corpus) {
    q_text[rec.question.id] = rec.question.text;
    a_text[rec.question.id] = rec.answer.text;
  }
  for (const auto& p : r.pairs) {
    for (const auto& id : cfg.excluded_ids) {
      CHECK(p.text_a != q_text[id]);
      CHECK(p.text_b != a_text[id]);
    }
  }
  CHECK(count_label(r.pairs, 1) == 38);
}

TEST_CASE("aa: start is the first two sentences") {
  std::vector<Answer> answers = {answer("1", "S1. S2. S3. S4.", "c"),
                                 answer("2", "T1. T2. T3.", "c")};
  auto r = build_aa_pairs(answers, {});
  REQUIRE(count_label(r.pairs, 1) == 2);
  bool saw = false;
  for (const auto& p : r.pairs) {
    if (p.label == 1 && p.text_a == "S1. S2.") {
      CHECK(p.text_b == "S3. S4.");
      saw = true;
    }
  }
  CHECK(saw);
}

TEST_CASE("aa: two three-sentence answers swap ends") {
  std::vector<Answer> answers = {answer("1", "A1. A2. A3.", "c"),
                                 answer("2", "B1. B2. B3.", "c"),
                                 answer("3", "C1. C2.", "c")};
  auto r = build_aa_pairs(answers, {});
  CHECK(r.skipped == 1);
  REQUIRE(r.pairs.size() == 4);
  for (const auto& p : r.pairs) {
    CHECK(p.kind == PairKind::AA);
    if (p.label == 0) CHECK(p.text_b == (p.text_a == "A1. A2." ? "B3." : "A3."));
  }
}

TEST_CASE("aa: injected splitter is used") {
  std::vector<Answer> answers = {answer("1", "a|b|c", "c"), answer("2", "d|e|f", "c")};
  auto pipe = [](std::string_view t) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= t.size(); ++i) {
      if (i == t.size() || t[i] == '|') {
        out.emplace_back(t.substr(start, i - start));
        start = i + 1;
      }
    }
    return out;
  };
  auto r = build_aa_pairs(answers, pipe, {});
  REQUIRE(r.pairs.size() == 4);
  CHECK(r.pairs[0].text_a.find('|') == std::string::npos);
}

TEST_CASE("qc: negative category is forced with two categories") {
  std::vector<Question> qs = {
      Question{.id = "1", .text = "q", .category = "acne", .labeler_id = {}, .seed_id = {}},
      Question{.id = "2", .text = "r", .category = "adhd", .labeler_id = {}, .seed_id = {}}};
  auto r = build_qc_pairs(qs, {});
  REQUIRE(r.pairs.size() == 4);
  for (const auto& p : r.pairs) {
    if (p.text_a == "q") CHECK(p.text_b == (p.label ? "acne" : "adhd"));
  }
  qs[1].category = "acne";
  CHECK_THROWS_AS(build_qc_pairs(qs, {}), ValidationError);
}

TEST_CASE("qc: ten questions over three categories") {
  std::vector<Question> qs;
  const char* cats[] = {"acne", "adhd", "gout"};
  for (int i = 0; i < 10; ++i) {
    qs.push_back(Question{.id = std::to_string(i), .text = "question " + std::to_string(i),
                          .category = cats[i % 3], .labeler_id = {}, .seed_id = {}});
  }
  TaskGenConfig cfg;
  cfg.rng_seed = 3;
  auto r = build_qc_pairs(qs, cfg);
  CHECK(count_label(r.pairs, 1) == 10);
  CHECK(count_label(r.pairs, 0) == 10);
  for (const auto& p : r.pairs) {
    int idx = std::stoi(p.text_a.substr(9));
    CHECK((p.text_b == cats[idx % 3]) == (p.label == 1));
  }
}

TEST_CASE("passthrough_qq normalizes kind") {
  std::vector<LabeledPair> in(3);
  for (int i = 0; i < 3; ++i) {
    in[i].text_a = "a" + std::to_string(i);
    in[i].text_b = "b";
    in[i].kind = i == 1 ? PairKind::QA : PairKind::QC;
  }
  auto out = passthrough_qq(in);
  REQUIRE(out.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(out[i].kind == PairKind::QQ);
    CHECK(out[i].text_a == in[i].text_a);
  }
  CHECK(passthrough_qq({}).empty());
}
