#include "negkb/negation_pipeline.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "negkb/error.hpp"

namespace negkb {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::keep: return "keep";
    case Verdict::drop: return "drop";
    case Verdict::undecided: return "undecided";
  }
  return "?";
}

bool NegationCandidate::dropped() const {
  return std::any_of(trace.begin(), trace.end(),
                     [](const FilterOutcome& o) { return o.verdict == Verdict::drop; });
}

namespace {

void require_unit_interval(double value, const char* what) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw std::invalid_argument(std::string(what) + " must lie in [0,1]");
  }
}

void route(FilterResult& result, NegationCandidate&& cand, FilterOutcome outcome) {
  bool drop = outcome.verdict == Verdict::drop;
  cand.trace.push_back(std::move(outcome));
  (drop ? result.dropped : result.kept).push_back(std::move(cand));
}

}  // namespace

std::vector<NegationCandidate> infer_candidates(const KbIndex& kb, const SiblingSet& sibs) {
  const auto& positives = kb.phrases_of(sibs.target);
  std::set<std::string, std::less<>> sibling_phrases;
  for (const auto& s : sibs.siblings) {
    const auto& ps = kb.phrases_of(s.name);
    sibling_phrases.insert(ps.begin(), ps.end());
  }
  std::vector<NegationCandidate> out;
  for (const auto& phrase : sibling_phrases) {
    if (positives.contains(phrase)) continue;
    NegationCandidate c;
    c.target = sibs.target;
    c.phrase = phrase;
    c.underpopulated = sibs.underpopulated();
    for (const auto& s : sibs.siblings) {
      if (kb.holds(s.name, phrase)) c.holders.push_back(s.name);
    }
    out.push_back(std::move(c));
  }
  return out;
}

FilterResult filter_kb_similarity(std::vector<NegationCandidate> cands, const KbIndex& kb,
                                  const PhraseSimilarity& sim, double lambda, FailMode mode) {
  require_unit_interval(lambda, "lambda");
  FilterResult result;
  for (auto& cand : cands) {
    FilterOutcome outcome{std::string(kKbSimilarityFilter), Verdict::keep, std::nullopt, {}, {}};
    std::size_t failures = 0;
    std::string first_failure;
    for (const auto& positive : kb.phrases_of(cand.target)) {
      double s = 0.0;
      try {
        s = sim.similarity(cand.phrase, positive);
      } catch (const ProviderError& e) {
        if (mode == FailMode::fail_closed) throw;
        if (failures++ == 0) first_failure = e.what();
        continue;
      }
      if (!outcome.evidence || s > *outcome.evidence) {
        outcome.evidence = s;
        outcome.detail = positive;
      }
    }
    if (outcome.evidence && *outcome.evidence >= lambda) {
      outcome.verdict = Verdict::drop;
    } else if (failures > 0) {
      outcome.verdict = Verdict::undecided;
      outcome.warning = std::to_string(failures) + " similarity lookup(s) failed; first: " + first_failure;
    }
    route(result, std::move(cand), std::move(outcome));
  }
  return result;
}

FilterResult filter_lm_probe(std::vector<NegationCandidate> cands, const MaskPredictor& pred,
                             const TemplateBuilder& make_probe, std::size_t tau, FailMode mode) {
  if (tau == 0) throw std::invalid_argument("tau must be >= 1");
  FilterResult result;
  for (auto& cand : cands) {
    FilterOutcome outcome{std::string(kLmProbeFilter), Verdict::keep, std::nullopt, {}, {}};
    auto probe = make_probe(cand.phrase);
    outcome.detail = probe;
    try {
      if (auto rank = probe_rank(pred, probe, cand.target, tau)) {
        outcome.verdict = Verdict::drop;
        outcome.evidence = static_cast<double>(*rank);
      }
    } catch (const ProviderError& e) {
      if (mode == FailMode::fail_closed) throw;
      outcome.verdict = Verdict::undecided;
      outcome.warning = e.what();
    } catch (const MalformedProbeError& e) {
      if (mode == FailMode::fail_closed) throw;
      outcome.verdict = Verdict::undecided;
      outcome.warning = e.what();
    }
    route(result, std::move(cand), std::move(outcome));
  }
  return result;
}

FilterResult filter_generic(std::vector<NegationCandidate> cands, const KbIndex& kb, double beta) {
  require_unit_interval(beta, "beta");
  FilterResult result;
  for (auto& cand : cands) {
    double freq = phrase_frequency(kb, cand.phrase);
    route(result, std::move(cand),
          {std::string(kGenericFilter), freq >= beta ? Verdict::drop : Verdict::keep, freq, {}, {}});
  }
  return result;
}

}  // namespace negkb
