#include "negkb/kb_store.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "negkb/error.hpp"
#include "negkb/text.hpp"

namespace negkb {

namespace {

const PhraseSet kNoPhrases;
const ConceptSet kNoConcepts;

std::optional<Statement> parse_row(std::string_view line, std::string& reason) {
  auto body = trim(line);
  if (!body.empty() && body.front() == '{') {
    auto j = nlohmann::json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      reason = "invalid JSON";
      return std::nullopt;
    }
    auto c = j.find("concept");
    auto p = j.find("phrase");
    if (c == j.end() || p == j.end() || !c->is_string() || !p->is_string()) {
      reason = "JSON record needs string keys concept and phrase";
      return std::nullopt;
    }
    auto s = Statement::make(c->get<std::string>(), p->get<std::string>());
    if (!s) reason = "empty field";
    return s;
  }
  auto cols = split(line, '\t');
  if (cols.size() != 2) {
    reason = "expected 2 tab-separated columns, got " + std::to_string(cols.size());
    return std::nullopt;
  }
  auto s = Statement::make(cols[0], cols[1]);
  if (!s) reason = "empty field";
  return s;
}

}  // namespace

std::optional<Statement> Statement::make(std::string_view concept_name, std::string_view phrase) {
  Statement s{normalize(concept_name), normalize(phrase)};
  if (s.concept_name.empty() || s.phrase.empty()) return std::nullopt;
  return s;
}

bool KbIndex::add(const Statement& s) {
  auto& phrases = phrases_of_[s.concept_name];
  if (!phrases.insert(s.phrase).second) return false;
  concepts_of_[s.phrase].insert(s.concept_name);
  ++statements_;
  return true;
}

const PhraseSet& KbIndex::phrases_of(std::string_view concept_name) const {
  auto it = phrases_of_.find(concept_name);
  return it == phrases_of_.end() ? kNoPhrases : it->second;
}

const ConceptSet& KbIndex::concepts_of(std::string_view phrase) const {
  auto it = concepts_of_.find(phrase);
  return it == concepts_of_.end() ? kNoConcepts : it->second;
}

bool KbIndex::has_concept(std::string_view concept_name) const {
  return phrases_of_.find(concept_name) != phrases_of_.end();
}

bool KbIndex::holds(std::string_view concept_name, std::string_view phrase) const {
  const auto& phrases = phrases_of(concept_name);
  return phrases.find(phrase) != phrases.end();
}

std::vector<std::string> KbIndex::concepts() const {
  std::vector<std::string> out;
  out.reserve(phrases_of_.size());
  for (const auto& [c, _] : phrases_of_) out.push_back(c);
  return out;
}

KbIndex load_kb(std::istream& source, const std::optional<ConceptSet>& concept_filter,
                IngestStats& stats) {
  if (concept_filter && concept_filter->empty()) {
    throw std::invalid_argument("concept filter must not be empty");
  }
  KbIndex index;
  for_each_data_line(source, stats, [&](std::size_t number, std::string_view line) {
    std::string reason;
    auto s = parse_row(line, reason);
    if (!s) {
      stats.reject(number, reason);
      return;
    }
    if (concept_filter && !concept_filter->contains(s->concept_name)) {
      ++stats.filtered;
      return;
    }
    if (index.add(*s)) {
      ++stats.accepted;
    } else {
      ++stats.duplicates;
    }
  });
  enforce_malformed_limit(stats, "assertion file");
  return index;
}

KbIndex load_kb(std::istream& source, const std::optional<ConceptSet>& concept_filter) {
  IngestStats stats;
  return load_kb(source, concept_filter, stats);
}

KbIndex load_kb_file(const std::string& path, const std::optional<ConceptSet>& concept_filter,
                     IngestStats& stats) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read assertion file " + path);
  return load_kb(in, concept_filter, stats);
}

ConceptSet load_concept_list(std::istream& source) {
  ConceptSet out;
  IngestStats stats;
  for_each_data_line(source, stats, [&](std::size_t, std::string_view line) {
    auto c = normalize(line);
    if (!c.empty()) out.insert(std::move(c));
  });
  return out;
}

ConceptSet load_concept_list_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read concept list " + path);
  return load_concept_list(in);
}

double phrase_frequency(const KbIndex& index, std::string_view phrase) {
  if (index.empty()) throw UndefinedFrequencyError("phrase frequency over an empty KB");
  return static_cast<double>(index.concepts_of(phrase).size()) /
         static_cast<double>(index.concept_count());
}

}  // namespace negkb
