#include <set>

#include "doctest.h"
#include "fixtures.hpp"
#include "medsim/corpus.hpp"
#include "medsim/error.hpp"

using namespace medsim;
using medsim::testing::TempDir;

namespace {

LabeledPair qq(std::string a, std::string b, int label) {
  LabeledPair p;
  p.text_a = std::move(a);
  p.text_b = std::move(b);
  p.label = label;
  return p;
}

Question q(std::string text) {
  return Question{.id = text, .text = text, .category = std::nullopt,
                  .labeler_id = std::nullopt, .seed_id = std::nullopt};
}

}  // namespace

TEST_CASE("validate rejects bad labels and empty texts") {
  CHECK_NOTHROW(validate(qq("a", "b", 1)));
  CHECK_THROWS_AS(validate(qq("a", "b", 2)), ValidationError);
  CHECK_THROWS_AS(validate(qq("  ", "b", 0)), ValidationError);
  CHECK_THROWS_AS(validate(qq("a", "", 0)), ValidationError);
  CHECK_THROWS_AS(validate(qq("same", "same", 0)), ValidationError);
  CHECK_NOTHROW(validate(qq("same", "same", 1)));
}

TEST_CASE("jsonl errors name row and field") {
  std::string content =
      R"({"text_a":"a","text_b":"b","label":1,"kind":"QQ"})" "\n"
      R"({"text_a":"c","text_b":"d","label":2,"kind":"QQ"})" "\n";
  try {
    parse_pairs_jsonl(content);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    std::string what = e.what();
    INFO(what);
    CHECK(what.find("row 2") != std::string::npos);
    CHECK(what.find("label") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_pairs_jsonl(R"({"text_a":"a","label":1})"), ValidationError);
  CHECK_THROWS_AS(parse_pairs_jsonl("{not json"), ValidationError);
}

TEST_CASE("jsonl round trip preserves every field") {
  std::vector<LabeledPair> pairs = {qq("What is a fever?", "Define fever", 1),
                                    qq("Is acne curable?", "How tall is Everest?", 0)};
  pairs[0].labeler_id = "dr1";
  pairs[0].seed_id = "What is a fever?";
  pairs[0].id = "p0";
  pairs[1].kind = PairKind::QA;
  auto back = parse_pairs_jsonl(to_jsonl(pairs));
  CHECK(back == pairs);

  TempDir dir;
  save_pairs(dir / "p.jsonl", pairs);
  CHECK(load_pairs(dir / "p.jsonl", PairFormat::jsonl) == pairs);
}

TEST_CASE("csv loader reads the released MQP layout") {
  std::string with_header =
      "dr_id,question_1,question_2,label\n"
      "1,\"After how many hour from drinking an antibiotic can I drink alcohol?\","
      "\"I have a party tonight and I took my last dose of Azithromycin this morning. "
      "Can I have a few drinks?\",1\n"
      "1,\"After how many hour from drinking an antibiotic can I drink alcohol?\","
      "\"I vomited this morning and I am not sure if it is the side effect of my "
      "antibiotic or the alcohol I took last night...\",0\n";
  auto pairs = parse_pairs_csv(with_header);
  REQUIRE(pairs.size() == 2);
  CHECK(pairs[0].labeler_id == "1");
  CHECK(pairs[0].seed_id == pairs[0].text_a);
  CHECK(pairs[1].label == 0);

  std::string headerless = with_header.substr(with_header.find('\n') + 1);
  CHECK(parse_pairs_csv(headerless) == pairs);

  CHECK_THROWS_AS(parse_pairs_csv("dr_id,question_1,question_2,label\n1,a,b,7\n"),
                  ValidationError);
}

TEST_CASE("csv loader reads the canonical header") {
  auto pairs = parse_pairs_csv("text_a,text_b,label,kind\nx y,y z,0,QC\n");
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0].kind == PairKind::QC);
  CHECK_FALSE(pairs[0].labeler_id.has_value());
}

TEST_CASE("qa corpus loader links answers to questions") {
  auto recs = parse_qa_jsonl(
      R"({"id":"q1","question":"Why cough?","answer":"Irritation. Try honey.","category":"resp"})");
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].answer.question_id == "q1");
  CHECK(recs[0].answer.category == "resp");
  CHECK(parse_qa_jsonl(to_jsonl(std::span<const QaRecord>(recs)))[0].answer.text ==
        "Irritation. Try honey.");
  CHECK_THROWS_AS(parse_qa_jsonl(R"({"id":"q1","question":"","answer":"x"})"),
                  ValidationError);
}

TEST_CASE("compute_stats on the two-question example") {
  std::vector<Question> qs = {q("a b"), q("a b c")};
  auto s = compute_stats(qs);
  CHECK(s.unique_question_count == 2);
  CHECK(s.token_min == 2);
  CHECK(s.token_max == 3);
  CHECK(s.token_mean == 2.5);
  CHECK(s.token_median == 2.5);
}

TEST_CASE("compute_stats counts duplicate questions once") {
  std::vector<Question> qs = {q("a b"), q("a b "), q("x y z w")};
  auto s = compute_stats(qs);
  CHECK(s.unique_question_count == 2);
  CHECK(s.token_median == 3.0);
  CHECK_THROWS_AS(compute_stats(std::span<const Question>{}), ValidationError);
}

TEST_CASE("pair_stats counts both sides") {
  std::vector<LabeledPair> pairs = {qq("a b", "c d e", 1), qq("a b", "f", 0)};
  auto s = pair_stats(pairs);
  CHECK(s.pair_count == 2);
  CHECK(s.unique_question_count == 3);
  CHECK(s.token_min == 1);
  CHECK(s.token_max == 3);
  CHECK(s.token_median == 2.0);
}

TEST_CASE("split_by_labeler detects a seed shared across train and test") {
  auto a = qq("seed question", "rewrite one", 1);
  a.labeler_id = "dr1";
  a.seed_id = "s1";
  auto b = qq("seed question", "rewrite two", 0);
  b.labeler_id = "dr2";
  b.seed_id = "s1";
  std::vector<LabeledPair> pairs = {a, b};
  SplitAssignment assign{{"dr1"}, {}, {"dr2"}};
  try {
    split_by_labeler(pairs, assign);
    FAIL("expected overlap error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("s1") != std::string::npos);
  }
}

TEST_CASE("split_by_labeler rejects overlapping and missing labelers") {
  auto a = qq("x", "y", 1);
  a.labeler_id = "dr1";
  std::vector<LabeledPair> pairs = {a};
  CHECK_THROWS_AS(split_by_labeler(pairs, {{"dr1"}, {}, {"dr1"}}), ValidationError);
  CHECK_THROWS_AS(split_by_labeler(pairs, {{"dr9"}, {}, {}}), ValidationError);
  pairs[0].labeler_id.reset();
  CHECK_THROWS_AS(split_by_labeler(pairs, {{"dr1"}, {}, {}}), ValidationError);
}

TEST_CASE("split_by_seed keeps seed groups whole and is deterministic") {
  Rng rng(5);
  auto pairs = medsim::testing::mqp_shaped_pairs(rng, 6, 20);
  auto s1 = split_by_seed(pairs, 0.1, 0.2, 3);
  auto s2 = split_by_seed(pairs, 0.1, 0.2, 3);
  CHECK(s1.train == s2.train);
  CHECK(s1.test == s2.test);
  CHECK(s1.train.size() + s1.dev.size() + s1.test.size() == pairs.size());
  std::set<std::string> train_seeds, test_seeds;
  for (const auto& p : s1.train) train_seeds.insert(*p.seed_id);
  for (const auto& p : s1.test) test_seeds.insert(*p.seed_id);
  for (const auto& s : test_seeds) CHECK(train_seeds.count(s) == 0);
  CHECK(!s1.test.empty());
  CHECK_THROWS_AS(split_by_seed(pairs, 0.5, 0.5, 1), ValidationError);
}
