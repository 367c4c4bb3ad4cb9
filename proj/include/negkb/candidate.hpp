#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace negkb {

enum class Verdict { keep, drop, undecided };

const char* to_string(Verdict v);

/// One filter's decision about one candidate, with the evidence behind it.
struct FilterOutcome {
  std::string filter;
  Verdict verdict = Verdict::keep;
  std::optional<double> evidence;  // sim, probe rank, or frequency
  std::string detail;              // e.g. the closest positive phrase
  std::string warning;             // provider trouble in fail-open mode
};

/// hits / gamma, kept as integers so scores compare exactly.
struct SiblingFrequency {
  std::size_t hits = 0;
  std::size_t gamma = 0;

  double value() const { return static_cast<double>(hits) / static_cast<double>(gamma); }
  bool operator==(const SiblingFrequency&) const = default;
};

struct ProvenanceGroup {
  std::string hypernym;
  std::vector<std::string> members;
  std::size_t holder_count = 0;  // n, the relaxed holder count

  double score() const {
    return static_cast<double>(members.size()) / static_cast<double>(holder_count);
  }
  bool operator==(const ProvenanceGroup&) const = default;
};

/// Holder siblings grouped under target hypernyms. Groups are disjoint, in
/// non-increasing score order; `uncovered` holds the rest.
struct Provenance {
  std::vector<ProvenanceGroup> groups;
  std::vector<std::string> uncovered;

  bool operator==(const Provenance&) const = default;
};

/// A phrase some sibling asserts and the target does not.
struct NegationCandidate {
  std::string target;
  std::string phrase;
  std::vector<std::string> holders;  // siblings asserting the exact phrase, sibling order
  std::vector<FilterOutcome> trace;

  std::optional<SiblingFrequency> strict;
  std::optional<SiblingFrequency> relaxed;
  std::vector<std::string> relaxed_holders;  // sibling order
  std::vector<std::string> absorbed;         // near-duplicates merged into this one
  std::optional<Provenance> provenance;
  bool underpopulated = false;  // fewer siblings than gamma were found
  std::vector<std::string> warnings;

  bool dropped() const;
};

}  // namespace negkb
