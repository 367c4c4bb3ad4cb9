#include "negkb/taxonomy.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <unordered_map>

#include "negkb/error.hpp"
#include "negkb/text.hpp"

namespace negkb {

namespace {

bool ordered_before(const Hypernym& a, const Hypernym& b) {
  if (a.confidence != b.confidence) return a.confidence > b.confidence;
  return a.name < b.name;
}

bool valid_confidence(double c) { return std::isfinite(c) && c >= 0.0 && c <= 1.0; }

bool parse_double(std::string_view text, double& out) {
  text = trim(text);
  if (text.empty()) return false;
  // from_chars rejects a leading '+', which some dumps emit.
  if (text.front() == '+') text.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

}  // namespace

TaxonomyIndex::TaxonomyIndex(std::span<const TaxonEdge> edges) {
  std::map<std::string, std::unordered_map<std::string, double>, std::less<>> merged;
  for (const auto& e : edges) {
    auto hypo = normalize(e.hyponym);
    auto hyper = normalize(e.hypernym);
    if (hypo.empty() || hyper.empty()) throw std::invalid_argument("empty taxonomy term");
    if (hypo == hyper) throw std::invalid_argument("taxonomy self-loop: " + hypo);
    if (!valid_confidence(e.confidence)) {
      throw std::invalid_argument("taxonomy confidence outside [0,1] for " + hypo);
    }
    auto& slot = merged[hypo];
    auto [it, inserted] = slot.emplace(hyper, e.confidence);
    if (!inserted) it->second = std::max(it->second, e.confidence);
  }
  for (auto& [hypo, hypers] : merged) {
    auto& list = hypernyms_of_[hypo];
    list.reserve(hypers.size());
    for (auto& [name, conf] : hypers) {
      membership_.emplace(hypo, name);
      list.push_back({name, conf});
    }
    std::sort(list.begin(), list.end(), ordered_before);
  }
}

std::span<const Hypernym> TaxonomyIndex::hypernyms_of(std::string_view concept_name) const {
  auto it = hypernyms_of_.find(concept_name);
  if (it == hypernyms_of_.end()) return {};
  return it->second;
}

bool TaxonomyIndex::contains(std::string_view hyponym, std::string_view hypernym) const {
  auto it = hypernyms_of_.find(hyponym);
  if (it == hypernyms_of_.end()) return false;
  return membership_.find(std::pair<std::string, std::string>(hyponym, hypernym)) !=
         membership_.end();
}

TaxonomyIndex load_taxonomy(std::istream& source, IngestStats& stats) {
  std::vector<TaxonEdge> edges;
  for_each_data_line(source, stats, [&](std::size_t number, std::string_view line) {
    auto cols = split(line, '\t');
    if (cols.size() != 3) {
      stats.reject(number, "expected 3 tab-separated columns, got " + std::to_string(cols.size()));
      return;
    }
    TaxonEdge e{normalize(cols[0]), normalize(cols[1]), 0.0};
    if (e.hyponym.empty() || e.hypernym.empty()) {
      stats.reject(number, "empty field");
      return;
    }
    if (e.hyponym == e.hypernym) {
      stats.reject(number, "hyponym equals hypernym");
      return;
    }
    if (!parse_double(cols[2], e.confidence) || !valid_confidence(e.confidence)) {
      stats.reject(number, "confidence is not a number in [0,1]");
      return;
    }
    ++stats.accepted;
    edges.push_back(std::move(e));
  });
  enforce_malformed_limit(stats, "taxonomy file");
  TaxonomyIndex index(edges);
  stats.duplicates = edges.size() - index.edge_count();
  stats.accepted = index.edge_count();
  return index;
}

TaxonomyIndex load_taxonomy(std::istream& source) {
  IngestStats stats;
  return load_taxonomy(source, stats);
}

TaxonomyIndex load_taxonomy_file(const std::string& path, IngestStats& stats) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read taxonomy file " + path);
  return load_taxonomy(in, stats);
}

std::vector<Hypernym> top_hypernyms(const TaxonomyIndex& index, std::string_view concept_name,
                                    std::size_t k) {
  if (k == 0) throw std::invalid_argument("top_hypernyms: k must be >= 1");
  auto all = index.hypernyms_of(concept_name);
  auto n = std::min(k, all.size());
  return {all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n)};
}

bool shares_hypernym(const TaxonomyIndex& index, std::string_view a, std::string_view b,
                     std::size_t k) {
  if (k == 0) throw std::invalid_argument("shares_hypernym: k must be >= 1");
  auto top_a = index.hypernyms_of(a).first(std::min(k, index.hypernyms_of(a).size()));
  auto top_b = index.hypernyms_of(b).first(std::min(k, index.hypernyms_of(b).size()));
  for (const auto& ha : top_a) {
    for (const auto& hb : top_b) {
      if (ha.name == hb.name) return true;
    }
  }
  return false;
}

bool isa_related(const TaxonomyIndex& index, std::string_view a, std::string_view b) {
  return index.contains(a, b) || index.contains(b, a);
}

}  // namespace negkb
