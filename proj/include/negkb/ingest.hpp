#pragma once

#include <cstddef>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace negkb {

struct RowError {
  std::size_t line = 0;
  std::string reason;
};

/// Per-file ingestion accounting shared by every line-oriented reader.
struct IngestStats {
  std::size_t rows = 0;        // non-blank, non-comment lines
  std::size_t accepted = 0;
  std::size_t malformed = 0;
  std::size_t duplicates = 0;  // merged into an earlier row
  std::size_t filtered = 0;    // rejected by an allow-list
  std::vector<RowError> errors;

  void reject(std::size_t line, std::string reason);
};

/// Maximum tolerated share of malformed rows before a load aborts.
inline constexpr double kMaxMalformedShare = 0.10;

/// Throws IngestionError when malformed rows exceed kMaxMalformedShare.
void enforce_malformed_limit(const IngestStats& stats, const std::string& source);

/// Calls `fn(line_number, line)` for each line that is neither blank nor a
/// `#` comment, counting it in `stats.rows`. Strips a trailing CR.
template <typename Fn>
void for_each_data_line(std::istream& in, IngestStats& stats, Fn&& fn) {
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string_view view(line);
    auto first = view.find_first_not_of(" \t");
    if (first == std::string_view::npos || view[first] == '#') continue;
    ++stats.rows;
    fn(number, view);
  }
}

}  // namespace negkb
