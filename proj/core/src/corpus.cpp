#include "medsim/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "csv.hpp"
#include "medsim/error.hpp"
#include "medsim/random.hpp"
#include "medsim/text.hpp"

namespace medsim {

using nlohmann::json;

std::string_view to_string(PairKind kind) {
  switch (kind) {
    case PairKind::QQ: return "QQ";
    case PairKind::QA: return "QA";
    case PairKind::AA: return "AA";
    case PairKind::QC: return "QC";
  }
  return "QQ";
}

PairKind parse_pair_kind(std::string_view s) {
  if (s == "QQ") return PairKind::QQ;
  if (s == "QA") return PairKind::QA;
  if (s == "AA") return PairKind::AA;
  if (s == "QC") return PairKind::QC;
  throw ValidationError("unknown pair kind '" + std::string(s) + "'");
}

void validate(const LabeledPair& pair) {
  if (text::trim(pair.text_a).empty()) {
    throw ValidationError("field text_a: empty text");
  }
  if (text::trim(pair.text_b).empty()) {
    throw ValidationError("field text_b: empty text");
  }
  if (pair.label != 0 && pair.label != 1) {
    throw ValidationError("field label: expected 0 or 1, got " +
                          std::to_string(pair.label));
  }
  if (pair.kind == PairKind::QQ && pair.label == 0 &&
      pair.text_a == pair.text_b) {
    throw ValidationError("field text_b: negative QQ pair has identical texts");
  }
}

PairFormat parse_pair_format(std::string_view s) {
  if (s == "jsonl") return PairFormat::jsonl;
  if (s == "csv") return PairFormat::csv;
  throw ValidationError("unknown pair format '" + std::string(s) + "'");
}

PairFormat guess_pair_format(const std::filesystem::path& path) {
  return text::to_lower_ascii(path.extension().string()) == ".csv"
             ? PairFormat::csv
             : PairFormat::jsonl;
}

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ValidationError("cannot open '" + path.string() + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw RuntimeFailure("cannot write '" + path.string() + "'");
  }
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw RuntimeFailure("write failed for '" + path.string() + "'");
}

std::string row_error(std::size_t row, std::string_view detail) {
  return "row " + std::to_string(row) + " " + std::string(detail);
}

template <typename Fn>
void for_each_line(std::string_view content, Fn&& fn) {
  std::size_t row = 0;
  std::size_t pos = 0;
  while (pos <= content.size()) {
    std::size_t nl = content.find('\n', pos);
    if (nl == std::string_view::npos) nl = content.size();
    std::string_view line = content.substr(pos, nl - pos);
    ++row;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!text::trim(line).empty()) fn(row, line);
    if (nl == content.size()) break;
    pos = nl + 1;
  }
}

std::string required_string(const json& obj, const char* field,
                            std::size_t row) {
  auto it = obj.find(field);
  if (it == obj.end()) {
    throw ValidationError(row_error(row, std::string("field ") + field +
                                             ": missing"));
  }
  if (!it->is_string()) {
    throw ValidationError(row_error(row, std::string("field ") + field +
                                             ": expected string"));
  }
  return it->get<std::string>();
}

std::optional<std::string> optional_string(const json& obj, const char* field,
                                           std::size_t row) {
  auto it = obj.find(field);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) {
    throw ValidationError(row_error(row, std::string("field ") + field +
                                             ": expected string"));
  }
  return it->get<std::string>();
}

void check_and_record_id(const std::optional<std::string>& id, std::size_t row,
                         std::unordered_set<std::string>& seen) {
  if (!id) return;
  if (!seen.insert(*id).second) {
    throw ValidationError(row_error(row, "field id: duplicate id '" + *id + "'"));
  }
}

void validate_at(const LabeledPair& pair, std::size_t row) {
  try {
    validate(pair);
  } catch (const ValidationError& e) {
    throw ValidationError(row_error(row, e.what()));
  }
}

int parse_label(std::string_view s, std::size_t row) {
  std::string t(text::trim(s));
  if (t == "0") return 0;
  if (t == "1") return 1;
  throw ValidationError(row_error(row, "field label: expected 0 or 1, got '" +
                                           t + "'"));
}

}  // namespace

std::vector<LabeledPair> parse_pairs_jsonl(std::string_view content) {
  std::vector<LabeledPair> pairs;
  std::unordered_set<std::string> ids;
  for_each_line(content, [&](std::size_t row, std::string_view line) {
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ValidationError(row_error(row, std::string("malformed json: ") +
                                               e.what()));
    }
    if (!obj.is_object()) {
      throw ValidationError(row_error(row, "expected a json object"));
    }
    LabeledPair p;
    p.text_a = required_string(obj, "text_a", row);
    p.text_b = required_string(obj, "text_b", row);
    auto label = obj.find("label");
    if (label == obj.end()) {
      throw ValidationError(row_error(row, "field label: missing"));
    }
    if (!label->is_number_integer()) {
      throw ValidationError(row_error(row, "field label: expected integer"));
    }
    auto raw = label->get<std::int64_t>();
    if (raw != 0 && raw != 1) {
      throw ValidationError(row_error(
          row, "field label: expected 0 or 1, got " + std::to_string(raw)));
    }
    p.label = static_cast<int>(raw);
    try {
      p.kind = parse_pair_kind(required_string(obj, "kind", row));
    } catch (const ValidationError& e) {
      std::string what = e.what();
      if (what.rfind("row ", 0) == 0) throw;
      throw ValidationError(row_error(row, "field kind: " + what));
    }
    p.labeler_id = optional_string(obj, "labeler_id", row);
    p.seed_id = optional_string(obj, "seed_id", row);
    p.id = optional_string(obj, "id", row);
    check_and_record_id(p.id, row, ids);
    validate_at(p, row);
    pairs.push_back(std::move(p));
  });
  return pairs;
}

std::vector<LabeledPair> parse_pairs_csv(std::string_view content) {
  auto rows = detail::parse_csv(content);
  std::vector<LabeledPair> pairs;
  if (rows.empty()) return pairs;

  std::map<std::string, std::size_t> columns;
  for (std::size_t i = 0; i < rows.front().fields.size(); ++i) {
    columns[text::to_lower_ascii(text::trim(rows.front().fields[i]))] = i;
  }
  bool canonical = columns.count("text_a") && columns.count("text_b");
  bool mqp_header = columns.count("question_1") && columns.count("question_2");
  std::size_t first = (canonical || mqp_header) ? 1 : 0;
  if (!canonical && !mqp_header) {
    // Headerless release: dr_id, question_1, question_2, label.
    columns = {{"dr_id", 0}, {"question_1", 1}, {"question_2", 2}, {"label", 3}};
  }
  if (!columns.count("label")) {
    throw ValidationError("csv header has no 'label' column");
  }

  std::unordered_set<std::string> ids;
  for (std::size_t r = first; r < rows.size(); ++r) {
    const auto& row = rows[r];
    auto get = [&](const std::string& name) -> std::optional<std::string> {
      auto it = columns.find(name);
      if (it == columns.end()) return std::nullopt;
      if (it->second >= row.fields.size()) {
        throw ValidationError(row_error(row.line, "field " + name + ": missing"));
      }
      return row.fields[it->second];
    };
    auto non_empty = [](std::optional<std::string> v) {
      if (v && text::trim(*v).empty()) v.reset();
      return v;
    };
    LabeledPair p;
    if (canonical) {
      p.text_a = *get("text_a");
      p.text_b = *get("text_b");
      auto kind = non_empty(get("kind"));
      if (kind) {
        try {
          p.kind = parse_pair_kind(text::trim(*kind));
        } catch (const ValidationError& e) {
          throw ValidationError(row_error(row.line, std::string("field kind: ") +
                                                        e.what()));
        }
      }
      p.labeler_id = non_empty(get("labeler_id"));
      p.seed_id = non_empty(get("seed_id"));
      p.id = non_empty(get("id"));
    } else {
      p.text_a = *get("question_1");
      p.text_b = *get("question_2");
      p.kind = PairKind::QQ;
      p.labeler_id = non_empty(get("dr_id"));
      p.seed_id = p.text_a;
    }
    p.label = parse_label(*get("label"), row.line);
    check_and_record_id(p.id, row.line, ids);
    validate_at(p, row.line);
    pairs.push_back(std::move(p));
  }
  return pairs;
}

std::vector<LabeledPair> load_pairs(const std::filesystem::path& path,
                                    PairFormat format) {
  std::string content = read_file(path);
  try {
    return format == PairFormat::csv ? parse_pairs_csv(content)
                                     : parse_pairs_jsonl(content);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::string to_jsonl(std::span<const LabeledPair> pairs) {
  std::string out;
  for (const auto& p : pairs) {
    nlohmann::ordered_json obj;
    if (p.id) obj["id"] = *p.id;
    obj["text_a"] = p.text_a;
    obj["text_b"] = p.text_b;
    obj["label"] = p.label;
    obj["kind"] = to_string(p.kind);
    if (p.labeler_id) obj["labeler_id"] = *p.labeler_id;
    if (p.seed_id) obj["seed_id"] = *p.seed_id;
    out += obj.dump();
    out += '\n';
  }
  return out;
}

void save_pairs(const std::filesystem::path& path,
                std::span<const LabeledPair> pairs) {
  write_file(path, to_jsonl(pairs));
}

std::vector<QaRecord> parse_qa_jsonl(std::string_view content) {
  std::vector<QaRecord> records;
  std::unordered_set<std::string> ids;
  for_each_line(content, [&](std::size_t row, std::string_view line) {
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ValidationError(row_error(row, std::string("malformed json: ") +
                                               e.what()));
    }
    if (!obj.is_object()) {
      throw ValidationError(row_error(row, "expected a json object"));
    }
    QaRecord rec;
    rec.question.id = required_string(obj, "id", row);
    rec.question.text = required_string(obj, "question", row);
    rec.answer.text = required_string(obj, "answer", row);
    rec.question.category = optional_string(obj, "category", row);
    if (text::trim(rec.question.text).empty()) {
      throw ValidationError(row_error(row, "field question: empty text"));
    }
    if (text::trim(rec.answer.text).empty()) {
      throw ValidationError(row_error(row, "field answer: empty text"));
    }
    if (!ids.insert(rec.question.id).second) {
      throw ValidationError(
          row_error(row, "field id: duplicate id '" + rec.question.id + "'"));
    }
    rec.answer.id = rec.question.id;
    rec.answer.question_id = rec.question.id;
    rec.answer.category = rec.question.category;
    records.push_back(std::move(rec));
  });
  return records;
}

std::vector<QaRecord> load_qa_corpus(const std::filesystem::path& path) {
  std::string content = read_file(path);
  try {
    return parse_qa_jsonl(content);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::string to_jsonl(std::span<const QaRecord> records) {
  std::string out;
  for (const auto& r : records) {
    nlohmann::ordered_json obj;
    obj["id"] = r.question.id;
    obj["question"] = r.question.text;
    obj["answer"] = r.answer.text;
    if (r.question.category) obj["category"] = *r.question.category;
    out += obj.dump();
    out += '\n';
  }
  return out;
}

namespace {

std::string join_ids(const std::set<std::string>& ids) {
  std::string out;
  for (const auto& id : ids) {
    if (!out.empty()) out += ", ";
    out += id;
  }
  return out;
}

}  // namespace

PairSplit split_by_labeler(std::span<const LabeledPair> pairs,
                           const SplitAssignment& assignment) {
  std::map<std::string, int> owner;
  const std::set<std::string>* sets[] = {&assignment.train_labelers,
                                         &assignment.dev_labelers,
                                         &assignment.test_labelers};
  for (int s = 0; s < 3; ++s) {
    for (const auto& labeler : *sets[s]) {
      auto [it, inserted] = owner.emplace(labeler, s);
      if (!inserted) {
        throw ValidationError("labeler '" + labeler +
                              "' is assigned to more than one split");
      }
    }
  }

  PairSplit out;
  std::vector<LabeledPair>* parts[] = {&out.train, &out.dev, &out.test};
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    if (!p.labeler_id) {
      throw ValidationError("pair " + std::to_string(i) + " has no labeler_id");
    }
    auto it = owner.find(*p.labeler_id);
    if (it == owner.end()) {
      throw ValidationError("pair " + std::to_string(i) + ": labeler '" +
                            *p.labeler_id + "' is not in the assignment");
    }
    parts[it->second]->push_back(p);
  }

  std::set<std::string> train_seeds;
  for (const auto& p : out.train) {
    if (p.seed_id) train_seeds.insert(*p.seed_id);
  }
  std::set<std::string> shared;
  for (const auto& p : out.test) {
    if (p.seed_id && train_seeds.count(*p.seed_id)) shared.insert(*p.seed_id);
  }
  if (!shared.empty()) {
    throw ValidationError("seed questions shared between train and test: " +
                          join_ids(shared));
  }
  return out;
}

PairSplit split_by_seed(std::span<const LabeledPair> pairs,
                        double dev_fraction, double test_fraction,
                        std::uint64_t seed) {
  if (dev_fraction < 0 || test_fraction < 0 ||
      dev_fraction + test_fraction >= 1.0) {
    throw ValidationError("split fractions must be >= 0 and sum to < 1");
  }
  // Group order follows first appearance so the result depends only on input
  // order and seed.
  std::vector<std::string> group_keys;
  std::unordered_map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    std::string key = pairs[i].seed_id ? *pairs[i].seed_id : pairs[i].text_a;
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) group_keys.push_back(key);
    it->second.push_back(i);
  }
  Rng rng(seed);
  shuffle_in_place(group_keys, rng);

  const double n = static_cast<double>(pairs.size());
  PairSplit out;
  std::size_t assigned = 0;
  for (const auto& key : group_keys) {
    double frac = static_cast<double>(assigned) / n;
    auto* part = frac < test_fraction                  ? &out.test
                 : frac < test_fraction + dev_fraction ? &out.dev
                                                       : &out.train;
    for (std::size_t idx : groups[key]) part->push_back(pairs[idx]);
    assigned += groups[key].size();
  }
  return out;
}

CorpusStats compute_stats(std::span<const Question> questions,
                          Tokenizer tokenizer) {
  if (questions.empty()) {
    throw ValidationError("compute_stats: empty question list");
  }
  std::set<std::string> unique;
  for (const auto& q : questions) unique.emplace(text::trim(q.text));

  std::vector<std::size_t> counts;
  counts.reserve(unique.size());
  for (const auto& t : unique) counts.push_back(tokenizer(t).size());
  std::sort(counts.begin(), counts.end());

  CorpusStats stats;
  stats.unique_question_count = unique.size();
  stats.token_min = counts.front();
  stats.token_max = counts.back();
  std::size_t m = counts.size();
  stats.token_median =
      m % 2 == 1 ? static_cast<double>(counts[m / 2])
                 : (static_cast<double>(counts[m / 2 - 1]) +
                    static_cast<double>(counts[m / 2])) / 2.0;
  // Integer sum first: the mean is then independent of question order.
  std::size_t total = 0;
  for (auto c : counts) total += c;
  stats.token_mean = static_cast<double>(total) / static_cast<double>(m);
  return stats;
}

CorpusStats compute_stats(std::span<const Question> questions) {
  return compute_stats(questions, [](std::string_view s) {
    return text::split_whitespace(s);
  });
}

CorpusStats pair_stats(std::span<const LabeledPair> pairs) {
  std::vector<Question> questions;
  questions.reserve(pairs.size() * 2);
  for (const auto& p : pairs) {
    questions.push_back(Question{.id = {}, .text = p.text_a, .category = {},
                                 .labeler_id = {}, .seed_id = {}});
    questions.push_back(Question{.id = {}, .text = p.text_b, .category = {},
                                 .labeler_id = {}, .seed_id = {}});
  }
  CorpusStats stats = compute_stats(questions);
  stats.pair_count = pairs.size();
  return stats;
}

}  // namespace medsim
