#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "negkb/candidate.hpp"

namespace negkb {

/// Output line: {"concept","negation","strict","relaxed","absorbed",
/// "provenance":[{"hypernym","members","score"}],"uncovered"}. Unscored
/// candidates carry null scores.
nlohmann::json negation_record(const NegationCandidate& cand);

/// Debug/audit line: the candidate with holders, full filter trace and warnings.
nlohmann::json candidate_record(const NegationCandidate& cand);

/// "¬(s, f) unlike other <h>, e.g., <members>[, and unlike other ...]"
std::string render_verbose(const NegationCandidate& cand);

}  // namespace negkb
