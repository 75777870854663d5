#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace medsim::text {

std::string_view trim(std::string_view s);
std::string to_lower_ascii(std::string_view s);

// Splits on ASCII whitespace, dropping empty pieces.
std::vector<std::string> split_whitespace(std::string_view s);

// Lowercased runs of alphanumeric characters. Bytes >= 0x80 count as
// alphanumeric so UTF-8 letters stay inside their token.
std::vector<std::string> alnum_tokens(std::string_view s);

inline bool is_word_byte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') ||
         (c >= 'A' && c <= 'Z') || c >= 0x80;
}

// Number of UTF-8 code points (continuation bytes are not counted).
std::size_t utf8_length(std::string_view s);

}  // namespace medsim::text
