#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "negkb/embedding_store.hpp"
#include "negkb/kb_store.hpp"
#include "negkb/taxonomy.hpp"

namespace negkb {

/// Comparable concepts for one target, most similar first.
struct SiblingSet {
  std::string target;
  std::vector<ScoredConcept> siblings;
  std::size_t gamma = 0;

  // Walk accounting.
  std::size_t scanned = 0;
  std::size_t skipped_not_in_kb = 0;
  std::size_t skipped_no_common_hypernym = 0;
  std::size_t skipped_isa_related = 0;

  bool underpopulated() const { return siblings.size() < gamma; }
  std::vector<std::string> names() const;
  bool contains(std::string_view name) const;
};

struct SiblingOptions {
  std::size_t gamma = 30;
  std::size_t hypernym_k = 5;
  /// Maximum ranked concepts to inspect; 0 walks the whole ranking.
  std::size_t horizon = 0;
};

/// Walks the cosine ranking of `target`, keeping concepts that are in the KB,
/// share a top-k hypernym with the target, and have no IsA link to it, until
/// gamma are kept. Throws UnknownConceptError if the target has no vector.
template <typename Scalar>
SiblingSet select_siblings(const KbIndex& kb, const TaxonomyIndex& tax,
                           const EmbeddingStore<Scalar>& emb, std::string_view target,
                           const SiblingOptions& options) {
  if (options.gamma == 0) throw std::invalid_argument("select_siblings: gamma must be >= 1");
  SiblingSet out;
  out.target = std::string(target);
  out.gamma = options.gamma;
  for (auto& candidate : rank_by_similarity(emb, target)) {
    if (out.siblings.size() == options.gamma) break;
    if (options.horizon != 0 && out.scanned == options.horizon) break;
    ++out.scanned;
    if (!kb.has_concept(candidate.name)) {
      ++out.skipped_not_in_kb;
    } else if (!shares_hypernym(tax, target, candidate.name, options.hypernym_k)) {
      ++out.skipped_no_common_hypernym;
    } else if (isa_related(tax, target, candidate.name)) {
      ++out.skipped_isa_related;
    } else {
      out.siblings.push_back(std::move(candidate));
    }
  }
  return out;
}

/// Ablation stand-in for comparable concepts: gamma KB concepts other than
/// the target, drawn uniformly with a generator seeded from (seed, target).
/// Scores are 0.
SiblingSet random_siblings(const KbIndex& kb, std::string_view target, std::size_t gamma,
                           std::uint64_t seed);

}  // namespace negkb
