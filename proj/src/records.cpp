#include "negkb/records.hpp"

#include <sstream>

namespace negkb {

using nlohmann::json;

namespace {

json score_json(const std::optional<SiblingFrequency>& f) {
  return f ? json(f->value()) : json(nullptr);
}

std::string join(const std::vector<std::string>& items, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

}  // namespace

json negation_record(const NegationCandidate& cand) {
  json provenance = json::array();
  json uncovered = json::array();
  if (cand.provenance) {
    for (const auto& g : cand.provenance->groups) {
      provenance.push_back({{"hypernym", g.hypernym}, {"members", g.members}, {"score", g.score()}});
    }
    uncovered = cand.provenance->uncovered;
  }
  json rec = json::object();
  rec["concept"] = cand.target;
  rec["negation"] = cand.phrase;
  rec["strict"] = score_json(cand.strict);
  rec["relaxed"] = score_json(cand.relaxed);
  rec["absorbed"] = cand.absorbed;
  rec["provenance"] = std::move(provenance);
  rec["uncovered"] = std::move(uncovered);
  return rec;
}

json candidate_record(const NegationCandidate& cand) {
  json rec = negation_record(cand);
  rec["holders"] = cand.holders;
  rec["relaxed_holders"] = cand.relaxed_holders;
  rec["underpopulated"] = cand.underpopulated;
  rec["dropped"] = cand.dropped();
  json trace = json::array();
  for (const auto& o : cand.trace) {
    json step{{"filter", o.filter}, {"verdict", to_string(o.verdict)}};
    step["evidence"] = o.evidence ? json(*o.evidence) : json(nullptr);
    if (!o.detail.empty()) step["detail"] = o.detail;
    if (!o.warning.empty()) step["warning"] = o.warning;
    trace.push_back(std::move(step));
  }
  rec["trace"] = std::move(trace);
  rec["warnings"] = cand.warnings;
  return rec;
}

std::string render_verbose(const NegationCandidate& cand) {
  std::ostringstream os;
  os << "¬(" << cand.target << ", " << cand.phrase << ")";
  if (cand.provenance) {
    bool first = true;
    for (const auto& g : cand.provenance->groups) {
      os << (first ? " unlike other " : ", and unlike other ") << g.hypernym << ", e.g., "
         << join(g.members, ", ");
      first = false;
    }
  }
  return os.str();
}

}  // namespace negkb
