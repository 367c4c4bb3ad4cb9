#include "negkb/ranker.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "negkb/error.hpp"

namespace negkb {

const char* to_string(RankMode mode) { return mode == RankMode::strict ? "strict" : "relaxed"; }

RankMode parse_rank_mode(std::string_view text) {
  if (text == "strict") return RankMode::strict;
  if (text == "relaxed") return RankMode::relaxed;
  throw std::invalid_argument("rank mode must be strict or relaxed, got '" + std::string(text) + "'");
}

namespace {

void require_gamma(const SiblingSet& sibs) {
  if (sibs.gamma == 0) throw UndefinedScoreError("sibling frequency with gamma = 0");
}

// a < b as rationals.
bool less_than(const SiblingFrequency& a, const SiblingFrequency& b) {
  return a.hits * b.gamma < b.hits * a.gamma;
}

const SiblingFrequency& score_of(const NegationCandidate& c, RankMode mode) {
  const auto& s = mode == RankMode::strict ? c.strict : c.relaxed;
  if (!s) throw std::invalid_argument("candidate '" + c.phrase + "' is not scored");
  return *s;
}

// Plain union-find over candidate indices.
struct Components {
  std::vector<std::size_t> parent;
  explicit Components(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  }
  void join(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

SiblingFrequency score_strict(const NegationCandidate& cand, const SiblingSet& sibs,
                              const KbIndex& kb) {
  require_gamma(sibs);
  std::size_t hits = 0;
  for (const auto& s : sibs.siblings) hits += kb.holds(s.name, cand.phrase) ? 1 : 0;
  return {hits, sibs.gamma};
}

RelaxedScore score_relaxed(const NegationCandidate& cand, const SiblingSet& sibs, const KbIndex& kb,
                           const PhraseSimilarity& sim, double lambda, FailMode mode) {
  require_gamma(sibs);
  RelaxedScore out{{0, sibs.gamma}, {}, {}};
  for (const auto& s : sibs.siblings) {
    bool holds = kb.holds(s.name, cand.phrase);
    if (!holds) {
      try {
        for (const auto& rephrase : kb.phrases_of(s.name)) {
          if (sim.similarity(cand.phrase, rephrase) >= lambda) {
            holds = true;
            break;
          }
        }
      } catch (const ProviderError& e) {
        if (mode == FailMode::fail_closed) throw;
        out.warnings.push_back("relaxed score for sibling " + s.name + " fell back to exact match: " +
                               e.what());
      }
    }
    if (holds) {
      ++out.frequency.hits;
      out.holders.push_back(s.name);
    }
  }
  return out;
}

void score_candidates(std::vector<NegationCandidate>& cands, const SiblingSet& sibs,
                      const KbIndex& kb, const PhraseSimilarity& sim, double lambda, FailMode mode) {
  for (auto& c : cands) {
    c.strict = score_strict(c, sibs, kb);
    auto relaxed = score_relaxed(c, sibs, kb, sim, lambda, mode);
    c.relaxed = relaxed.frequency;
    c.relaxed_holders = std::move(relaxed.holders);
    for (auto& w : relaxed.warnings) c.warnings.push_back(std::move(w));
  }
}

std::vector<NegationCandidate> merge_near_duplicates(std::vector<NegationCandidate> cands,
                                                     const PhraseSimilarity& sim, double lambda,
                                                     FailMode mode) {
  std::sort(cands.begin(), cands.end(),
            [](const NegationCandidate& a, const NegationCandidate& b) { return a.phrase < b.phrase; });
  const auto n = cands.size();
  Components comps(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      try {
        if (sim.similarity(cands[i].phrase, cands[j].phrase) >= lambda) comps.join(i, j);
      } catch (const ProviderError& e) {
        if (mode == FailMode::fail_closed) throw;
        cands[i].warnings.push_back("merge check against '" + cands[j].phrase + "' failed: " + e.what());
      }
    }
  }
  // Representative per component.
  auto better = [](const NegationCandidate& a, const NegationCandidate& b) {
    const auto& ra = score_of(a, RankMode::relaxed);
    const auto& rb = score_of(b, RankMode::relaxed);
    if (less_than(rb, ra)) return true;
    if (less_than(ra, rb)) return false;
    const auto& sa = score_of(a, RankMode::strict);
    const auto& sb = score_of(b, RankMode::strict);
    if (less_than(sb, sa)) return true;
    if (less_than(sa, sb)) return false;
    return a.phrase < b.phrase;
  };
  std::vector<std::size_t> rep(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    auto root = comps.find(i);
    if (rep[root] == n || better(cands[i], cands[rep[root]])) rep[root] = i;
  }
  std::vector<std::vector<std::string>> absorbed(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto r = rep[comps.find(i)];
    if (r == i) continue;
    absorbed[r].push_back(cands[i].phrase);
    for (auto& a : cands[i].absorbed) absorbed[r].push_back(std::move(a));
  }
  std::vector<NegationCandidate> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (rep[comps.find(i)] != i) continue;
    auto& c = cands[i];
    for (auto& a : absorbed[i]) c.absorbed.push_back(std::move(a));
    std::sort(c.absorbed.begin(), c.absorbed.end());
    out.push_back(std::move(c));
  }
  return out;
}

Provenance generate_provenance(std::span<const std::string> holders, const TaxonomyIndex& tax,
                               std::string_view target) {
  if (holders.empty()) throw std::invalid_argument("generate_provenance: no holders");
  Provenance out;
  std::vector<std::string> remaining(holders.begin(), holders.end());
  const auto pool = tax.hypernyms_of(target);
  while (!remaining.empty()) {
    const Hypernym* best = nullptr;
    std::size_t best_count = 0;
    for (const auto& h : pool) {
      auto count = static_cast<std::size_t>(std::count_if(
          remaining.begin(), remaining.end(), [&](const std::string& x) { return tax.contains(x, h.name); }));
      // Pool order already encodes the (confidence desc, name asc) tie-break.
      if (count > best_count) {
        best = &h;
        best_count = count;
      }
    }
    if (best == nullptr) break;
    ProvenanceGroup group{best->name, {}, holders.size()};
    std::vector<std::string> rest;
    for (auto& x : remaining) {
      (tax.contains(x, best->name) ? group.members : rest).push_back(std::move(x));
    }
    remaining = std::move(rest);
    out.groups.push_back(std::move(group));
  }
  out.uncovered = std::move(remaining);
  return out;
}

std::vector<NegationCandidate> rank(std::vector<NegationCandidate> cands, RankMode mode,
                                    std::size_t top_k) {
  if (top_k == 0) throw std::invalid_argument("rank: top_k must be >= 1");
  const RankMode other = mode == RankMode::strict ? RankMode::relaxed : RankMode::strict;
  for (const auto& c : cands) {
    score_of(c, mode);
    score_of(c, other);
  }
  std::sort(cands.begin(), cands.end(), [&](const NegationCandidate& a, const NegationCandidate& b) {
    const auto &pa = score_of(a, mode), &pb = score_of(b, mode);
    if (less_than(pb, pa)) return true;
    if (less_than(pa, pb)) return false;
    const auto &oa = score_of(a, other), &ob = score_of(b, other);
    if (less_than(ob, oa)) return true;
    if (less_than(oa, ob)) return false;
    return a.phrase < b.phrase;
  });
  if (cands.size() > top_k) cands.resize(top_k);
  return cands;
}

}  // namespace negkb
