#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "negkb/ingest.hpp"

namespace negkb {

struct TaxonEdge {
  std::string hyponym;
  std::string hypernym;
  double confidence = 0.0;
};

struct Hypernym {
  std::string name;
  double confidence = 0.0;

  bool operator==(const Hypernym&) const = default;
};

/// Hypernymy edges indexed per hyponym, each list ordered by
/// (confidence desc, hypernym asc). Repeated edges keep the highest confidence.
class TaxonomyIndex {
 public:
  TaxonomyIndex() = default;
  /// Edges are normalized; self-loops and confidences outside [0,1] throw
  /// std::invalid_argument.
  explicit TaxonomyIndex(std::span<const TaxonEdge> edges);

  /// Full ordered hypernym list; empty for unknown concepts.
  std::span<const Hypernym> hypernyms_of(std::string_view concept_name) const;

  bool contains(std::string_view hyponym, std::string_view hypernym) const;
  std::size_t edge_count() const { return membership_.size(); }

 private:
  std::map<std::string, std::vector<Hypernym>, std::less<>> hypernyms_of_;
  std::set<std::pair<std::string, std::string>, std::less<>> membership_;
};

/// Reads `hyponym<TAB>hypernym<TAB>confidence` rows under the shared 10%
/// malformed-row policy.
TaxonomyIndex load_taxonomy(std::istream& source, IngestStats& stats);
TaxonomyIndex load_taxonomy(std::istream& source);
TaxonomyIndex load_taxonomy_file(const std::string& path, IngestStats& stats);

/// At most k leading hypernyms of `concept_name`. Requires k >= 1.
std::vector<Hypernym> top_hypernyms(const TaxonomyIndex& index, std::string_view concept_name,
                                    std::size_t k);

/// True iff the top-k hypernym lists of a and b intersect.
bool shares_hypernym(const TaxonomyIndex& index, std::string_view a, std::string_view b,
                     std::size_t k);

/// True iff an IsA edge links a and b in either direction.
bool isa_related(const TaxonomyIndex& index, std::string_view a, std::string_view b);

}  // namespace negkb
