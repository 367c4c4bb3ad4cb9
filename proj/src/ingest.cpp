#include "negkb/ingest.hpp"

#include <sstream>

#include "negkb/error.hpp"

namespace negkb {

namespace {
constexpr std::size_t kKeptErrors = 50;
}

void IngestStats::reject(std::size_t line, std::string reason) {
  ++malformed;
  if (errors.size() < kKeptErrors) errors.push_back({line, std::move(reason)});
}

void enforce_malformed_limit(const IngestStats& stats, const std::string& source) {
  if (stats.rows == 0) return;
  const double share = static_cast<double>(stats.malformed) / static_cast<double>(stats.rows);
  if (share <= kMaxMalformedShare) return;
  std::ostringstream os;
  os << source << ": " << stats.malformed << " of " << stats.rows << " rows malformed";
  if (!stats.errors.empty()) {
    os << " (first: line " << stats.errors.front().line << ": " << stats.errors.front().reason << ")";
  }
  throw IngestionError(os.str());
}

}  // namespace negkb
