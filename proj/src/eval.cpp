#include "negkb/eval.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "negkb/error.hpp"
#include "negkb/text.hpp"

namespace negkb {

using nlohmann::json;

RelationMap default_relation_map() {
  return {
      {"AtLocation", "found in"},  {"CapableOf", "can"},     {"Causes", "cause"},
      {"CausesDesire", "make you want"}, {"Desires", "desires"}, {"HasA", "has"},
      {"HasPrerequisite", "need"}, {"HasProperty", "is"},     {"HasSubevent", "lead to"},
      {"IsA", "is"},               {"MadeOf", "is made of"},  {"PartOf", "is part of"},
      {"ReceivesAction", "is"},    {"UsedFor", "used for"},
  };
}

RelationMap load_relation_map(std::istream& in) {
  RelationMap out;
  IngestStats stats;
  for_each_data_line(in, stats, [&](std::size_t number, std::string_view line) {
    auto cols = split(line, '\t');
    if (cols.size() != 2 || trim(cols[0]).empty()) {
      throw Error("relation map line " + std::to_string(number) + ": expected relation<TAB>text");
    }
    out[std::string(trim(cols[0]))] = normalize(cols[1]);
  });
  return out;
}

std::string strip_negation_prefix(std::string_view relation) {
  relation = trim(relation);
  if (relation.size() > 3 && relation.substr(0, 3) == "Not" &&
      std::isupper(static_cast<unsigned char>(relation[3]))) {
    return std::string(relation.substr(3));
  }
  auto lower = to_lower(relation);
  if (lower.size() > 4 && (lower.starts_with("not_") || lower.starts_with("not "))) {
    return std::string(relation.substr(4));
  }
  return std::string(relation);
}

std::string naturalize_relation(std::string_view relation, const RelationMap& map) {
  if (auto it = map.find(relation); it != map.end()) return it->second;
  std::string out;
  for (std::size_t i = 0; i < relation.size(); ++i) {
    char c = relation[i];
    if (c == '_' || c == ' ') {
      out.push_back(' ');
      continue;
    }
    if (std::isupper(static_cast<unsigned char>(c)) && i > 0) out.push_back(' ');
    out.push_back(c);
  }
  return normalize(out);
}

std::vector<GroundTruthNegation> load_truth(std::istream& in, const RelationMap& relations,
                                            IngestStats& stats) {
  std::set<GroundTruthNegation> seen;
  std::vector<GroundTruthNegation> out;
  for_each_data_line(in, stats, [&](std::size_t number, std::string_view line) {
    auto cols = split(line, '\t');
    GroundTruthNegation t;
    if (cols.size() == 3) {
      auto rel = naturalize_relation(strip_negation_prefix(cols[1]), relations);
      auto tail = normalize(cols[2]);
      if (tail.empty() || trim(cols[1]).empty()) {
        stats.reject(number, "empty field");
        return;
      }
      t = {normalize(cols[0]), normalize(rel.empty() ? tail : rel + " " + tail)};
    } else if (cols.size() == 2) {
      t = {normalize(cols[0]), normalize(cols[1])};
    } else {
      stats.reject(number, "expected 2 or 3 tab-separated columns");
      return;
    }
    if (t.concept_name.empty() || t.phrase.empty()) {
      stats.reject(number, "empty field");
      return;
    }
    if (!seen.insert(t).second) {
      ++stats.duplicates;
      return;
    }
    ++stats.accepted;
    out.push_back(std::move(t));
  });
  enforce_malformed_limit(stats, "truth file");
  return out;
}

std::vector<GroundTruthNegation> load_truth(std::istream& in, const RelationMap& relations) {
  IngestStats stats;
  return load_truth(in, relations, stats);
}

std::vector<McqaItem> load_mcqa(std::istream& in) {
  std::vector<McqaItem> out;
  IngestStats stats;
  for_each_data_line(in, stats, [&](std::size_t number, std::string_view line) {
    auto where = "MCQA line " + std::to_string(number) + ": ";
    auto j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw Error(where + "invalid JSON");
    try {
      McqaItem item;
      item.concept_name = normalize(j.at("concept").get<std::string>());
      item.question = j.value("question", std::string());
      for (const auto& o : j.at("options")) item.options.push_back(normalize(o.get<std::string>()));
      item.correct = j.at("correct").get<std::size_t>();
      if (item.concept_name.empty()) throw Error(where + "empty concept");
      if (item.options.size() < 2) throw Error(where + "need at least 2 options");
      if (item.correct >= item.options.size()) throw Error(where + "correct index out of range");
      out.push_back(std::move(item));
    } catch (const json::exception& e) {
      throw Error(where + e.what());
    }
  });
  return out;
}

RecallResult recall(const NegationLists& outputs, std::span<const GroundTruthNegation> truth,
                    const RecallOptions& options, const PhraseSimilarity& sim) {
  if (truth.empty()) throw Error("recall over an empty ground truth");
  if (options.at_k && *options.at_k == 0) throw std::invalid_argument("recall: at_k must be >= 1");
  const auto depth = options.at_k.value_or(options.depth);
  RecallResult result{0, truth.size()};
  for (const auto& t : truth) {
    auto it = outputs.find(t.concept_name);
    if (it == outputs.end()) throw Error("no generated negations for truth concept '" + t.concept_name + "'");
    const auto& generated = it->second;
    const auto n = std::min(depth, generated.size());
    for (std::size_t i = 0; i < n; ++i) {
      const auto& g = generated[i];
      bool hit = g == t.phrase ||
                 (options.mode == MatchMode::relaxed && sim.similarity(g, t.phrase) >= options.lambda);
      if (hit) {
        ++result.recalled;
        break;
      }
    }
  }
  return result;
}

std::vector<OptionVerdict> eliminate(const McqaItem& item, std::span<const std::string> negations,
                                     const PhraseSimilarity& sim, double lambda) {
  std::vector<OptionVerdict> out;
  out.reserve(item.options.size());
  for (const auto& option : item.options) {
    OptionVerdict v{option, false, {}, 0.0};
    for (const auto& neg : negations) {
      double s = sim.similarity(option, neg);
      if (s >= lambda && (!v.eliminated || s > v.similarity)) {
        v.eliminated = true;
        v.matched_negation = neg;
        v.similarity = s;
      }
    }
    out.push_back(std::move(v));
  }
  return out;
}

EliminationTally tally(std::span<const std::vector<OptionVerdict>> verdicts,
                       std::span<const McqaItem> items) {
  if (verdicts.size() != items.size()) throw std::invalid_argument("tally: verdict/item count mismatch");
  EliminationTally t;
  for (std::size_t i = 0; i < items.size(); ++i) {
    for (std::size_t o = 0; o < verdicts[i].size(); ++o) {
      if (!verdicts[i][o].eliminated) continue;
      (o == items[i].correct ? t.unhelpful : t.helpful)++;
    }
  }
  return t;
}

}  // namespace negkb
