#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace medsim::detail {

struct CsvRow {
  std::size_t line = 0;  // 1-based line where the row starts
  std::vector<std::string> fields;
};

// RFC 4180: comma separated, double-quote escaping, quoted fields may span
// lines. Accepts LF or CRLF. Blank lines are skipped.
std::vector<CsvRow> parse_csv(std::string_view content);

}  // namespace medsim::detail
