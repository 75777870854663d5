#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "medsim/faqmatch.hpp"

namespace medsim {

// Checks required fields (id, question, answer, source, last_updated).
// Throws ValidationError naming the field.
FaqEntry faq_from_json(const nlohmann::json& obj);
nlohmann::ordered_json faq_to_json(const FaqEntry& entry);

// JSONL, one entry per line. Errors name the 1-based line.
std::vector<FaqEntry> parse_faq_jsonl(std::string_view content);
// A JSON array of entries, or JSONL.
std::vector<FaqEntry> parse_faq_payload(std::string_view body);

// A missing file is an empty store.
std::vector<FaqEntry> load_faq_store(const std::filesystem::path& path);
// Writes a sibling temp file and renames it over the store, so readers never
// observe a partial file.
void save_faq_store(const std::filesystem::path& path,
                    std::span<const FaqEntry> entries);

}  // namespace medsim
