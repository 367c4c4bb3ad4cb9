#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "negkb/candidate.hpp"
#include "negkb/kb_store.hpp"
#include "negkb/negation_pipeline.hpp"
#include "negkb/providers.hpp"
#include "negkb/siblings.hpp"
#include "negkb/taxonomy.hpp"

namespace negkb {

enum class RankMode { strict, relaxed };

const char* to_string(RankMode mode);
RankMode parse_rank_mode(std::string_view text);

/// Siblings asserting the exact phrase, over the configured gamma.
/// Throws UndefinedScoreError when gamma is 0.
SiblingFrequency score_strict(const NegationCandidate& cand, const SiblingSet& sibs,
                              const KbIndex& kb);

struct RelaxedScore {
  SiblingFrequency frequency;
  std::vector<std::string> holders;   // sibling order
  std::vector<std::string> warnings;  // fail-open degradations
};

/// Siblings asserting the phrase or any rephrase with sim >= lambda, over
/// gamma. In fail-open mode a sibling whose lookups fail counts only on an
/// exact match.
RelaxedScore score_relaxed(const NegationCandidate& cand, const SiblingSet& sibs, const KbIndex& kb,
                           const PhraseSimilarity& sim, double lambda, FailMode mode);

/// Fills strict, relaxed and relaxed_holders on every candidate.
void score_candidates(std::vector<NegationCandidate>& cands, const SiblingSet& sibs,
                      const KbIndex& kb, const PhraseSimilarity& sim, double lambda, FailMode mode);

/// Collapses each connected component of the sim >= lambda graph to one
/// representative: highest relaxed, then highest strict, then smallest phrase.
/// The others are listed in the representative's `absorbed`. Output is ordered
/// by phrase. Candidates must be scored.
std::vector<NegationCandidate> merge_near_duplicates(std::vector<NegationCandidate> cands,
                                                     const PhraseSimilarity& sim, double lambda,
                                                     FailMode mode = FailMode::fail_closed);

/// Greedy cover of `holders` by the target's hypernyms: each round takes the
/// hypernym covering the most remaining holders (ties: higher confidence for
/// the target, then name), until none covers any. `holders` must be non-empty.
Provenance generate_provenance(std::span<const std::string> holders, const TaxonomyIndex& tax,
                               std::string_view target);

/// Orders by the selected score, then the other score, then phrase, and keeps
/// the first top_k. Candidates must be scored.
std::vector<NegationCandidate> rank(std::vector<NegationCandidate> cands, RankMode mode,
                                    std::size_t top_k);

}  // namespace negkb
