#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "negkb/ingest.hpp"

namespace negkb {

using ConceptSet = std::set<std::string, std::less<>>;
using PhraseSet = std::set<std::string, std::less<>>;

/// A positive (concept, phrase) assertion. Both fields are normalized.
struct Statement {
  std::string concept_name;
  std::string phrase;

  /// Normalizes both fields; nullopt if either ends up empty.
  static std::optional<Statement> make(std::string_view concept_name, std::string_view phrase);

  auto operator<=>(const Statement&) const = default;
};

/// Concept -> phrases and its exact transpose. Immutable once loaded.
class KbIndex {
 public:
  /// Returns false when the statement was already present.
  bool add(const Statement& s);

  const PhraseSet& phrases_of(std::string_view concept_name) const;
  const ConceptSet& concepts_of(std::string_view phrase) const;

  bool has_concept(std::string_view concept_name) const;
  bool holds(std::string_view concept_name, std::string_view phrase) const;

  std::size_t concept_count() const { return phrases_of_.size(); }
  std::size_t statement_count() const { return statements_; }
  bool empty() const { return phrases_of_.empty(); }

  /// All concepts, ascending.
  std::vector<std::string> concepts() const;

  const std::map<std::string, PhraseSet, std::less<>>& by_concept() const { return phrases_of_; }
  const std::map<std::string, ConceptSet, std::less<>>& by_phrase() const { return concepts_of_; }

 private:
  std::map<std::string, PhraseSet, std::less<>> phrases_of_;
  std::map<std::string, ConceptSet, std::less<>> concepts_of_;
  std::size_t statements_ = 0;
};

/// Reads TSV (`concept<TAB>phrase`) or JSONL (`{"concept":..,"phrase":..}`)
/// lines; `#` lines and blank lines are skipped. The format is detected per
/// line. Duplicates are merged and counted. Throws IngestionError when more
/// than 10% of rows are malformed, std::invalid_argument on an empty filter.
KbIndex load_kb(std::istream& source, const std::optional<ConceptSet>& concept_filter,
                IngestStats& stats);
KbIndex load_kb(std::istream& source, const std::optional<ConceptSet>& concept_filter = std::nullopt);
KbIndex load_kb_file(const std::string& path, const std::optional<ConceptSet>& concept_filter,
                     IngestStats& stats);

/// One concept per line, normalized; `#` comments allowed.
ConceptSet load_concept_list(std::istream& source);
ConceptSet load_concept_list_file(const std::string& path);

/// Share of KB concepts asserting `phrase`. Throws UndefinedFrequencyError on
/// an empty index.
double phrase_frequency(const KbIndex& index, std::string_view phrase);

}  // namespace negkb
