#include "medsim/faq_store.hpp"

#include <fstream>
#include <sstream>

#include "medsim/error.hpp"
#include "medsim/text.hpp"

namespace medsim {

namespace {

std::string field(const nlohmann::json& obj, const char* name) {
  auto it = obj.find(name);
  if (it == obj.end()) throw ValidationError(std::string("field ") + name + ": missing");
  if (!it->is_string()) {
    throw ValidationError(std::string("field ") + name + ": expected string");
  }
  auto value = it->get<std::string>();
  if (text::trim(value).empty()) {
    throw ValidationError(std::string("field ") + name + ": empty");
  }
  return value;
}

}  // namespace

FaqEntry faq_from_json(const nlohmann::json& obj) {
  if (!obj.is_object()) throw ValidationError("expected a json object");
  FaqEntry e;
  e.id = field(obj, "id");
  e.question = field(obj, "question");
  e.answer = field(obj, "answer");
  e.source = field(obj, "source");
  e.last_updated = field(obj, "last_updated");
  if (!is_iso8601_date(e.last_updated)) {
    throw ValidationError("field last_updated: not an ISO-8601 date '" +
                          e.last_updated + "'");
  }
  return e;
}

nlohmann::ordered_json faq_to_json(const FaqEntry& e) {
  nlohmann::ordered_json j;
  j["id"] = e.id;
  j["question"] = e.question;
  j["answer"] = e.answer;
  j["source"] = e.source;
  j["last_updated"] = e.last_updated;
  return j;
}

std::vector<FaqEntry> parse_faq_jsonl(std::string_view content) {
  std::vector<FaqEntry> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    std::size_t nl = content.find('\n', pos);
    if (nl == std::string_view::npos) nl = content.size();
    std::string_view line = content.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      out.push_back(faq_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("line " + std::to_string(line_no) +
                            ": malformed json: " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<FaqEntry> parse_faq_payload(std::string_view body) {
  auto trimmed = text::trim(body);
  if (trimmed.empty()) throw ValidationError("empty payload");
  if (trimmed.front() != '[') return parse_faq_jsonl(body);
  nlohmann::json arr;
  try {
    arr = nlohmann::json::parse(trimmed);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed json: ") + e.what());
  }
  std::vector<FaqEntry> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    try {
      out.push_back(faq_from_json(arr[i]));
    } catch (const ValidationError& e) {
      // Entries are reported 1-based like JSONL lines.
      throw ValidationError("line " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return out;
}

std::vector<FaqEntry> load_faq_store(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) return {};
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open FAQ store '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_faq_jsonl(buf.str());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void save_faq_store(const std::filesystem::path& path,
                    std::span<const FaqEntry> entries) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw RuntimeFailure("cannot write '" + tmp.string() + "'");
    for (const auto& e : entries) out << faq_to_json(e).dump() << '\n';
    out.flush();
    if (!out) throw RuntimeFailure("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    throw RuntimeFailure("cannot replace '" + path.string() + "': " + ec.message());
  }
}

}  // namespace medsim
