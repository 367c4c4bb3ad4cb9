#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "negkb/ingest.hpp"
#include "negkb/providers.hpp"

namespace negkb {

/// A known-false statement; the phrase carries no negation keyword.
struct GroundTruthNegation {
  std::string concept_name;
  std::string phrase;

  auto operator<=>(const GroundTruthNegation&) const = default;
};

/// Relation name (negation prefix removed) -> natural-language prefix.
using RelationMap = std::map<std::string, std::string, std::less<>>;

/// CapableOf -> "can", HasProperty/IsA -> "is", HasA -> "has", ...
RelationMap default_relation_map();

/// `Relation<TAB>text` rows, layered over the defaults by the caller.
RelationMap load_relation_map(std::istream& in);

/// "NotCapableOf" -> "CapableOf", "not_desires" -> "desires"; other names unchanged.
std::string strip_negation_prefix(std::string_view relation);

/// Mapped text if present, otherwise the relation split on case changes and
/// underscores, lowercased ("PartOf" -> "part of").
std::string naturalize_relation(std::string_view relation, const RelationMap& map);

/// Rows are `concept<TAB>relation<TAB>tail` or `concept<TAB>phrase`. Duplicate
/// statements are merged. Shared 10% malformed-row policy.
std::vector<GroundTruthNegation> load_truth(std::istream& in, const RelationMap& relations,
                                            IngestStats& stats);
std::vector<GroundTruthNegation> load_truth(std::istream& in,
                                            const RelationMap& relations = default_relation_map());

struct McqaItem {
  std::string concept_name;
  std::string question;
  std::vector<std::string> options;
  std::size_t correct = 0;
};

/// JSONL `{"concept","question","options":[..],"correct":i}`. Throws Error on
/// any invalid record (fewer than 2 options, correct out of range).
std::vector<McqaItem> load_mcqa(std::istream& in);

/// Ranked negation phrases per concept.
using NegationLists = std::map<std::string, std::vector<std::string>, std::less<>>;

enum class MatchMode { strict, relaxed };

/// Depth used when no cutoff is requested.
inline constexpr std::size_t kDefaultRecallDepth = 200;

struct RecallOptions {
  MatchMode mode = MatchMode::strict;
  std::optional<std::size_t> at_k;  // overrides depth
  std::size_t depth = kDefaultRecallDepth;
  double lambda = 0.7;
};

struct RecallResult {
  std::size_t recalled = 0;
  std::size_t total = 0;
  double value() const { return static_cast<double>(recalled) / static_cast<double>(total); }
};

/// Share of truth statements matched by a generated negation for the same
/// concept within the cutoff: exact equality (strict) or sim >= lambda
/// (relaxed). Throws Error on empty truth or when a truth concept has no list.
RecallResult recall(const NegationLists& outputs, std::span<const GroundTruthNegation> truth,
                    const RecallOptions& options, const PhraseSimilarity& sim);

struct OptionVerdict {
  std::string option;
  bool eliminated = false;
  std::string matched_negation;  // best-matching negation when eliminated
  double similarity = 0.0;
};

inline constexpr double kEliminationThreshold = 0.7;

/// Crosses out every option reaching sim >= lambda with some negation.
std::vector<OptionVerdict> eliminate(const McqaItem& item, std::span<const std::string> negations,
                                     const PhraseSimilarity& sim,
                                     double lambda = kEliminationThreshold);

struct EliminationTally {
  std::size_t helpful = 0;    // wrong options removed
  std::size_t unhelpful = 0;  // correct option removed

  bool operator==(const EliminationTally&) const = default;
};

EliminationTally tally(std::span<const std::vector<OptionVerdict>> verdicts,
                       std::span<const McqaItem> items);

}  // namespace negkb
