#include "fixtures.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <set>
#include <sstream>

namespace medsim::testing {

namespace {

constexpr const char* kWords[] = {
    "fever",   "cough",    "rash",     "headache", "pain",      "doctor",
    "vaccine", "mask",     "symptoms", "children", "pregnant",  "allergy",
    "asthma",  "diabetes", "insulin",  "blood",    "pressure",  "sleep",
    "the",     "is",       "how",      "can",      "i",         "my",
    "what",    "should",   "do",       "a",        "of",        "to",
    "treat",   "spread",   "contagious", "test",   "quarantine", "travel",
    "hands",   "wash",     "elderly",  "risk",     "medicine",  "dose"};
constexpr const char* kSpice[] = {"COVID-19", "covid", "Coronavirus", "COVID",
                                  "covid-19s", "covidx", "Covid-19"};

}  // namespace

double JaccardScorer::score(std::string_view a, std::string_view b) const {
  auto ta = content_tokens(a, default_stopwords());
  auto tb = content_tokens(b, default_stopwords());
  std::set<std::string> sa(ta.begin(), ta.end()), sb(tb.begin(), tb.end());
  std::size_t inter = 0;
  for (const auto& t : sa) inter += sb.count(t);
  std::size_t uni = sa.size() + sb.size() - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

std::string random_text(Rng& rng, std::size_t min_words, std::size_t max_words) {
  std::size_t n = min_words + uniform_index(rng, max_words - min_words + 1);
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) out += uniform_index(rng, 10) == 0 ? ", " : " ";
    if (uniform_index(rng, 6) == 0) {
      out += kSpice[uniform_index(rng, std::size(kSpice))];
    } else {
      out += kWords[uniform_index(rng, std::size(kWords))];
    }
  }
  if (uniform_index(rng, 2) == 0) out += "?";
  return out;
}

std::vector<FaqEntry> random_faqs(Rng& rng, std::size_t n) {
  std::vector<FaqEntry> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    FaqEntry e;
    e.id = "faq-" + std::to_string(i);
    e.question = random_text(rng, 3, 10);
    e.answer = "answer " + std::to_string(i);
    e.source = "https://example.org/faq";
    e.last_updated = "2020-03-" + std::to_string(10 + i % 20);
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<QaRecord> random_qa_corpus(Rng& rng, std::size_t categories,
                                       std::size_t records) {
  std::vector<QaRecord> out;
  out.reserve(records);
  for (std::size_t i = 0; i < records; ++i) {
    QaRecord r;
    std::string category = "cat" + std::to_string(i % categories);
    r.question.id = "q" + std::to_string(i);
    r.question.text = random_text(rng, 4, 12) + " (" + std::to_string(i) + ")";
    r.question.category = category;
    r.answer.id = r.question.id;
    r.answer.question_id = r.question.id;
    std::string answer;
    std::size_t sentences = 1 + uniform_index(rng, 5);
    for (std::size_t s = 0; s < sentences; ++s) {
      if (s) answer += " ";
      answer += random_text(rng, 3, 8) + " " + std::to_string(i) + "." + std::to_string(s) + ".";
    }
    r.answer.text = answer;
    r.answer.category = category;
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<LabeledPair> mqp_shaped_pairs(Rng& rng, std::size_t labelers,
                                          std::size_t seeds_per_labeler) {
  std::vector<LabeledPair> out;
  for (std::size_t l = 0; l < labelers; ++l) {
    for (std::size_t s = 0; s < seeds_per_labeler; ++s) {
      std::string seed = random_text(rng, 4, 9) + " #" + std::to_string(l) + "-" +
                         std::to_string(s);
      for (int label : {1, 0}) {
        LabeledPair p;
        p.text_a = seed;
        p.text_b = random_text(rng, 4, 9) + " v" + std::to_string(label);
        p.label = label;
        p.labeler_id = "dr" + std::to_string(l);
        p.seed_id = seed;
        out.push_back(std::move(p));
      }
    }
  }
  return out;
}

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  auto base = std::filesystem::temp_directory_path();
  Rng rng(static_cast<std::uint64_t>(std::chrono::steady_clock::now().time_since_epoch().count()));
  path_ = base / ("medsim-test-" + std::to_string(rng() % 1000000000) + "-" +
                  std::to_string(counter++));
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

}  // namespace medsim::testing
