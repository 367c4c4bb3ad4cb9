#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "negkb/candidate.hpp"
#include "negkb/kb_store.hpp"
#include "negkb/providers.hpp"
#include "negkb/siblings.hpp"

namespace negkb {

/// What a filter does when its provider cannot answer.
enum class FailMode {
  fail_open,   // keep the candidate, record a warning
  fail_closed  // rethrow
};

struct FilterResult {
  std::vector<NegationCandidate> kept;
  std::vector<NegationCandidate> dropped;  // each carries exactly one drop verdict
};

inline constexpr std::string_view kKbSimilarityFilter = "kb_similarity";
inline constexpr std::string_view kLmProbeFilter = "lm_probe";
inline constexpr std::string_view kGenericFilter = "generic";

/// N = B \ A: one candidate per phrase held by some sibling but not by the
/// target, ordered by phrase.
std::vector<NegationCandidate> infer_candidates(const KbIndex& kb, const SiblingSet& sibs);

/// Drops candidates whose phrase reaches sim >= lambda with any target positive.
FilterResult filter_kb_similarity(std::vector<NegationCandidate> cands, const KbIndex& kb,
                                  const PhraseSimilarity& sim, double lambda, FailMode mode);

using TemplateBuilder = std::function<std::string(std::string_view phrase)>;

/// Drops candidates whose masked probe ranks the target within the top tau.
FilterResult filter_lm_probe(std::vector<NegationCandidate> cands, const MaskPredictor& pred,
                             const TemplateBuilder& make_probe, std::size_t tau, FailMode mode);

/// Drops candidates whose phrase is asserted by >= beta of all KB concepts.
FilterResult filter_generic(std::vector<NegationCandidate> cands, const KbIndex& kb, double beta);

}  // namespace negkb
